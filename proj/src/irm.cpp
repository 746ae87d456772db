#include "adjset/irm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "adjset/adjust.hpp"

namespace adjset {

std::vector<EnvMoments> env_moments(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<int>& env) {
    if (x.rows() != y.size() || static_cast<std::size_t>(y.size()) != env.size())
        throw IrmError("IRM inputs have different row counts");
    std::map<int, RowIndex> rows;
    for (std::size_t i = 0; i < env.size(); ++i) rows[env[i]].push_back(static_cast<Eigen::Index>(i));
    std::vector<EnvMoments> out;
    for (const auto& [label, idx] : rows) {
        const Eigen::MatrixXd xe = take_rows(x, idx);
        const Eigen::VectorXd ye = take_rows(y, idx);
        const double n = static_cast<double>(idx.size());
        EnvMoments m;
        m.label = label;
        m.rows = n;
        m.xx = xe.transpose() * xe / n;
        m.xy = xe.transpose() * ye / n;
        m.yy = ye.squaredNorm() / n;
        out.push_back(std::move(m));
    }
    return out;
}

double irm_risk(const EnvMoments& m, const Eigen::VectorXd& phi, Eigen::VectorXd* grad) {
    const Eigen::VectorXd sphi = m.xx * phi;
    if (grad) *grad = 2.0 * sphi - 2.0 * m.xy;
    return phi.dot(sphi) - 2.0 * phi.dot(m.xy) + m.yy;
}

double irm_penalty(const EnvMoments& m, const Eigen::VectorXd& phi, Eigen::VectorXd* grad) {
    const Eigen::VectorXd sphi = m.xx * phi;
    const double g = 2.0 * phi.dot(sphi) - 2.0 * phi.dot(m.xy);
    if (grad) *grad = 2.0 * g * (4.0 * sphi - 2.0 * m.xy);
    return g * g;
}

double irm_objective(const std::vector<EnvMoments>& envs, const Eigen::VectorXd& phi, double lambda,
                     Eigen::VectorXd* grad) {
    double total = 0.0;
    if (grad) grad->setZero(phi.size());
    for (const auto& m : envs) {
        const Eigen::VectorXd sphi = m.xx * phi;
        const double r = phi.dot(sphi) - 2.0 * phi.dot(m.xy) + m.yy;
        const double g = 2.0 * phi.dot(sphi) - 2.0 * phi.dot(m.xy);
        total += r + lambda * g * g;
        if (grad) *grad += (2.0 * sphi - 2.0 * m.xy) + lambda * 2.0 * g * (4.0 * sphi - 2.0 * m.xy);
    }
    return total;
}

IrmFit irm_train(const std::vector<EnvMoments>& train, const IrmHyper& hyper, int record_every) {
    if (train.empty()) throw IrmError("IRM needs at least one training environment");
    const Eigen::Index p = train.front().xy.size();
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(p), m1 = phi, m2 = phi, grad(p);
    IrmFit fit;
    fit.hyper = hyper;
    double lr = hyper.learning_rate;
    double b1 = 1.0, b2 = 1.0;
    auto penalty = [&] {
        double s = 0.0;
        for (const auto& m : train) s += irm_penalty(m, phi);
        return s;
    };
    for (int it = 0; it < hyper.iterations; ++it) {
        if (it > 0 && hyper.decay_every > 0 && it % hyper.decay_every == 0) lr *= hyper.decay;
        if (record_every > 0 && it % record_every == 0) fit.penalty_trajectory.push_back(penalty());
        irm_objective(train, phi, hyper.lambda, &grad);
        m1 = beta1 * m1 + (1.0 - beta1) * grad;
        m2 = beta2 * m2 + (1.0 - beta2) * grad.cwiseAbs2();
        b1 *= beta1;
        b2 *= beta2;
        const Eigen::ArrayXd mhat = m1.array() / (1.0 - b1);
        const Eigen::ArrayXd vhat = m2.array() / (1.0 - b2);
        phi.array() -= lr * mhat / (vhat.sqrt() + eps);
    }
    if (record_every > 0) fit.penalty_trajectory.push_back(penalty());
    fit.phi = phi;
    return fit;
}

namespace {

Eigen::MatrixXd standardize_or_center(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out = x.rowwise() - x.colwise().mean();
    const double n = static_cast<double>(x.rows());
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        const double sd = std::sqrt(out.col(c).squaredNorm() / n);
        if (sd > 0.0) out.col(c) /= sd;
    }
    return out;
}

}  // namespace

IrmFit irmv1_fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<int>& env,
                        const IrmParams& params) {
    if (x.rows() == 0) throw IrmError("IRM on an empty arm");
    if (x.cols() == 0) throw IrmError("IRM needs at least one candidate column");
    const Eigen::MatrixXd xs = standardize_or_center(x);
    const Eigen::VectorXd ys = standardize_or_center(y).col(0);
    const auto envs = env_moments(xs, ys, env);
    if (envs.size() < 2) throw IrmError("IRM needs at least two environments in the arm; found " +
                                        std::to_string(envs.size()));
    IrmFit best;
    best.validation_risk = std::numeric_limits<double>::infinity();
    for (double lr : params.learning_rates)
        for (double lambda : params.lambdas)
            for (std::size_t held = 0; held < envs.size(); ++held) {
                std::vector<EnvMoments> train;
                std::vector<int> labels;
                for (std::size_t k = 0; k < envs.size(); ++k)
                    if (k != held) {
                        train.push_back(envs[k]);
                        labels.push_back(envs[k].label);
                    }
                IrmHyper hyper{lr, lambda, params.iterations, params.decay_every, 0.5};
                IrmFit fit = irm_train(train, hyper, params.record_every);
                fit.validation_risk = irm_risk(envs[held], fit.phi);
                fit.validation_env = envs[held].label;
                fit.train_envs = labels;
                if (fit.validation_risk < best.validation_risk) best = std::move(fit);
            }
    return best;
}

std::vector<int> select_cluster_columns(const Eigen::VectorXd& phi) {
    const Eigen::Index p = phi.size();
    if (p < 2) throw IrmError("cluster selection needs at least two columns");
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXd a = phi.cwiseAbs();
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a[i] < a[j]; });
    // prefix sums of sorted values and squares
    std::vector<double> s(static_cast<std::size_t>(p) + 1, 0.0), q(s);
    for (Eigen::Index k = 0; k < p; ++k) {
        const double v = a[order[static_cast<std::size_t>(k)]];
        s[static_cast<std::size_t>(k) + 1] = s[static_cast<std::size_t>(k)] + v;
        q[static_cast<std::size_t>(k) + 1] = q[static_cast<std::size_t>(k)] + v * v;
    }
    auto sse = [&](std::size_t lo, std::size_t hi) {
        const double n = static_cast<double>(hi - lo);
        const double sum = s[hi] - s[lo];
        return (q[hi] - q[lo]) - sum * sum / n;
    };
    const auto n = static_cast<std::size_t>(p);
    std::size_t split = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < n; ++k) {
        const double cost = sse(0, k) + sse(k, n);
        if (k == 1 || cost < best - 1e-15 * std::max(1.0, best)) {
            best = cost;
            split = k;
        }
    }
    const double low_mean = s[split] / static_cast<double>(split);
    const double high_mean = (s[n] - s[split]) / static_cast<double>(n - split);
    std::vector<int> chosen;
    if (high_mean - low_mean < 1e-9) {
        chosen.resize(n);
        std::iota(chosen.begin(), chosen.end(), 0);
        return chosen;
    }
    for (std::size_t k = split; k < n; ++k) chosen.push_back(order[k]);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

NodeSet select_cluster_subset(const Eigen::VectorXd& phi, const std::vector<ColumnInfo>& columns) {
    if (static_cast<std::size_t>(phi.size()) != columns.size()) throw IrmError("phi and column list differ in size");
    NodeSet out;
    for (int c : select_cluster_columns(phi)) out.insert(columns[static_cast<std::size_t>(c)].owner);
    return out;
}

IrmResult ate_irm(const Dataset& data, const EnvAssignment& env, Arm arm, const IrmAteParams& params, Seed seed) {
    if (params.n_runs < 1) throw IrmError("n_runs must be positive");
    if (env.labels.size() != data.rows()) throw IrmError("environment labels do not match the dataset");
    const ColumnTable table = flatten_except(data, NodeSet{env.anchor});
    if (table.size() < 2) throw IrmError("IRM selection needs at least two candidate columns");
    const double arm_value = arm == Arm::treatment ? 1.0 : 0.0;

    IrmResult result;
    result.runs.resize(static_cast<std::size_t>(params.n_runs));
    auto one = [&](int r) {
        const Split split = run_split(data.rows(), params.train_fraction, seed, r);
        RowIndex rows;
        for (Eigen::Index i : split.train)
            if (data.treatment[i] == arm_value) rows.push_back(i);
        if (rows.empty()) throw IrmError("training split has an empty arm");
        IrmRun run;
        run.fit = irmv1_fit_linear(take_rows(table.values, rows), take_rows(data.outcome, rows),
                                   take_rows(env.labels, rows), params.irm);
        for (const auto& c : table.columns) run.fit.columns.push_back(c.name);
        run.selected = select_cluster_subset(run.fit.phi, table.columns);
        const std::vector<std::string> ids(run.selected.begin(), run.selected.end());
        run.ate = adjusted_run(flatten(data, ids).values, data.treatment, data.outcome, split.train, params.ridge);
        result.runs[static_cast<std::size_t>(r)] = std::move(run);
    };
    if (params.exec == Exec::parallel) {
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < params.n_runs; ++r) {
            try {
                one(r);
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (int r = 0; r < params.n_runs; ++r) one(r);
    }
    double total = 0.0;
    for (const auto& run : result.runs) total += run.ate;
    result.ate = total / params.n_runs;
    return result;
}

nlohmann::json irm_fit_to_json(const IrmFit& fit) {
    return {{"phi", std::vector<double>(fit.phi.data(), fit.phi.data() + fit.phi.size())},
            {"columns", fit.columns},
            {"learning_rate", fit.hyper.learning_rate},
            {"lambda", fit.hyper.lambda},
            {"iterations", fit.hyper.iterations},
            {"decay_every", fit.hyper.decay_every},
            {"decay", fit.hyper.decay},
            {"train_envs", fit.train_envs},
            {"validation_env", fit.validation_env},
            {"validation_risk", fit.validation_risk},
            {"penalty_trajectory", fit.penalty_trajectory}};
}

nlohmann::json irm_result_to_json(const IrmResult& result) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : result.runs)
        runs.push_back({{"fit", irm_fit_to_json(r.fit)},
                        {"selected", std::vector<std::string>(r.selected.begin(), r.selected.end())},
                        {"ate", r.ate}});
    return {{"ate", result.ate}, {"runs", runs}};
}

}  // namespace adjset
