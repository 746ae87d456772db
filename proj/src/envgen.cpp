#include "adjset/envgen.hpp"

#include <cstdio>

namespace adjset {

namespace {

const FeatureBlock& scalar_anchor(const Dataset& data, const std::string& anchor) {
    if (!data.has_feature(anchor)) throw DatasetError("anchor column '" + anchor + "' not found");
    const auto& block = data.feature(anchor);
    if (block.values.cols() != 1)
        throw DatasetError("anchor '" + anchor + "' has dimension " + std::to_string(block.values.cols()) +
                           "; only scalar anchors are supported");
    return block;
}

Eigen::MatrixXd logits(const EnvAssignment& env, const Eigen::VectorXd& x, const Eigen::VectorXd& t) {
    Eigen::MatrixXd out = (x.array() - env.anchor_mean).matrix() * env.anchor_weights.transpose();
    if (env.include_t) out += (t.array() - env.treatment_mean).matrix() * env.treatment_weights.transpose();
    return out;
}

void softmax_rows(Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        row.array() -= row.maxCoeff();
        row = row.array().exp().matrix();
        row /= row.sum();
    }
}

}  // namespace

Eigen::MatrixXd EnvAssignment::probabilities(const Dataset& data) const {
    const auto& x = scalar_anchor(data, anchor).values.col(0);
    Eigen::MatrixXd p = logits(*this, x, data.treatment);
    softmax_rows(p);
    return p;
}

EnvAssignment assign_environments(const Dataset& data, const std::string& anchor, bool include_t, int num_envs,
                                  Seed seed) {
    if (num_envs < 2) throw DatasetError("need at least 2 environments");
    const auto& x = scalar_anchor(data, anchor).values.col(0);
    if (include_t && data.treatment.size() != x.size())
        throw DatasetError("treatment column required when the environment depends on t");
    const auto n = x.size();
    if (n < 1) throw DatasetError("cannot assign environments to an empty dataset");

    EnvAssignment env;
    env.num_envs = num_envs;
    env.anchor = anchor;
    env.include_t = include_t;
    env.seed = seed;
    env.anchor_mean = x.mean();
    env.treatment_mean = include_t ? data.treatment.mean() : 0.0;

    Rng rng(derive_seed(seed, 0));
    std::uniform_real_distribution<double> unit(1.0, 2.0);
    auto scale = [&](int k) { return 1.0 - 2.0 * k / (num_envs - 1); };
    env.anchor_weights.resize(num_envs);
    env.treatment_weights = Eigen::VectorXd::Zero(num_envs);
    for (int k = 0; k < num_envs; ++k) env.anchor_weights[k] = unit(rng) * scale(k);
    if (include_t)
        for (int k = 0; k < num_envs; ++k) env.treatment_weights[k] = unit(rng) * scale(k);

    const Eigen::MatrixXd p = env.probabilities(data);
    env.labels.resize(static_cast<std::size_t>(n));
    const Seed label_seed = derive_seed(seed, 1);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = counter_uniform(label_seed, static_cast<std::uint64_t>(i));
        double acc = 0.0;
        int k = 0;
        for (; k < num_envs - 1; ++k) {
            acc += p(i, k);
            if (u < acc) break;
        }
        env.labels[static_cast<std::size_t>(i)] = k;
    }

    std::vector<std::size_t> counts(num_envs, 0);
    for (int label : env.labels) ++counts[label];
    for (int k = 0; k < num_envs; ++k) {
        const double share = static_cast<double>(counts[k]) / static_cast<double>(n);
        if (share < kMinEnvFraction) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "environment %d holds only %.4f of the rows", k, share);
            env.warnings.emplace_back(buf);
        }
    }
    return env;
}

Dataset with_environment(Dataset data, const EnvAssignment& env) {
    if (env.labels.size() != data.rows()) throw DatasetError("environment labels do not match the row count");
    data.environment = env.labels;
    return data;
}

nlohmann::json env_to_json(const EnvAssignment& env) {
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return {{"anchor", env.anchor},
            {"include_t", env.include_t},
            {"num_envs", env.num_envs},
            {"anchor_weights", vec(env.anchor_weights)},
            {"treatment_weights", vec(env.treatment_weights)},
            {"anchor_mean", env.anchor_mean},
            {"treatment_mean", env.treatment_mean},
            {"seed", env.seed},
            {"warnings", env.warnings}};
}

EnvAssignment env_from_json(const nlohmann::json& j, std::vector<int> labels) {
    auto vec = [](const nlohmann::json& a) {
        const auto v = a.get<std::vector<double>>();
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    EnvAssignment env;
    env.anchor = j.at("anchor").get<std::string>();
    env.include_t = j.at("include_t").get<bool>();
    env.num_envs = j.at("num_envs").get<int>();
    env.anchor_weights = vec(j.at("anchor_weights"));
    env.treatment_weights = vec(j.at("treatment_weights"));
    env.anchor_mean = j.at("anchor_mean").get<double>();
    env.treatment_mean = j.at("treatment_mean").get<double>();
    env.seed = j.at("seed").get<Seed>();
    env.warnings = j.value("warnings", std::vector<std::string>{});
    env.labels = std::move(labels);
    return env;
}

}  // namespace adjset
