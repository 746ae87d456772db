#include "adjset/scm.hpp"

#include <algorithm>
#include <cmath>

#include "adjset/fixtures.hpp"
#include "adjset/graph_io.hpp"

namespace adjset {

namespace {

std::size_t edge_position(const Graph& g, std::string_view from, std::string_view to) {
    const Edge key{g.index(from), g.index(to)};
    auto it = std::lower_bound(g.directed().begin(), g.directed().end(), key);
    if (it == g.directed().end() || *it != key)
        throw GraphError("SCM has no edge " + std::string(from) + "->" + std::string(to));
    return static_cast<std::size_t>(it - g.directed().begin());
}

void compute_means(LinearScm& scm) {
    const Graph& g = scm.graph;
    const std::size_t t = *g.treatment();
    const std::size_t y = *g.outcome();
    scm.means.assign(g.size(), Eigen::VectorXd());
    std::vector<std::vector<std::size_t>> in_edges(g.size());
    for (std::size_t e = 0; e < g.directed().size(); ++e) in_edges[g.directed()[e].second].push_back(e);
    for (std::size_t v : topological_order(g)) {
        if (v == t || v == y) continue;
        Eigen::VectorXd m = Eigen::VectorXd::Constant(scm.dims[v], scm.noise[v].mean());
        for (std::size_t e : in_edges[v]) m += scm.weights[e] * scm.means[g.directed()[e].first];
        scm.means[v] = m;
    }
}

void draw_weights(LinearScm& scm, Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    scm.weights.clear();
    for (const auto& [p, c] : scm.graph.directed()) {
        Eigen::MatrixXd block(scm.dims[c], scm.dims[p]);
        for (Eigen::Index i = 0; i < block.rows(); ++i)
            for (Eigen::Index j = 0; j < block.cols(); ++j) block(i, j) = dist(rng);
        scm.weights.push_back(block);
    }
}

// Draws weights with fresh streams until the pilot treated share is inside
// [kMinArmFraction, 1 - kMinArmFraction].
void draw_with_positivity(LinearScm& scm, Seed seed, double lo, double hi) {
    constexpr int kAttempts = 100;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        draw_weights(scm, rng, lo, hi);
        compute_means(scm);
        const double share = treated_fraction(scm, 4000, derive_seed(seed, 0x9057u, static_cast<std::uint64_t>(attempt)));
        if (share >= kMinArmFraction && share <= 1.0 - kMinArmFraction) return;
    }
    throw GraphError("could not draw SCM weights with both treatment arms above 1% of samples");
}

double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

const Eigen::MatrixXd& LinearScm::weight(std::string_view from, std::string_view to) const {
    return weights.at(edge_position(graph, from, to));
}

Eigen::MatrixXd& LinearScm::weight(std::string_view from, std::string_view to) {
    return weights.at(edge_position(graph, from, to));
}

double LinearScm::treatment_effect() const {
    return weight(graph.node(*graph.treatment()).id, graph.node(*graph.outcome()).id)(0, 0);
}

LinearScm gen_toy_scm(int d_tilde, Seed seed, const ToyOptions& options) {
    if (d_tilde < 1) throw GraphError("d_tilde must be at least 1");
    LinearScm scm;
    scm.graph = latent_expansion(options.anchor_outcome_edge ? fixtures::toy_x1y() : fixtures::toy());
    scm.generator = options.anchor_outcome_edge ? "toy_x1y" : "toy";
    scm.d_tilde = d_tilde;
    scm.seed = seed;
    const Graph& g = scm.graph;
    scm.dims.assign(g.size(), 1);
    scm.noise.assign(g.size(), NoiseSpec::gaussian(0.0, options.noise_variance));
    for (const char* id : {"u2", "u3", "u4", "x2", "x3"}) scm.dims[g.index(id)] = d_tilde;
    for (const char* id : {"u1", "u2", "u3", "u4"}) scm.noise[g.index(id)] = options.latent;
    draw_with_positivity(scm, seed, options.weight_lo, options.weight_hi);
    return scm;
}

LinearScm gen_random_scm(const Graph& g, Seed seed, const RandomScmOptions& options) {
    if (auto v = validate_graph(g, Strictness::sink_outcome); !v.empty())
        throw GraphError("random SCM needs a valid graph with a sink outcome: " + v.front().message);
    if (g.environment()) throw GraphError("random SCM graph may not contain an environment node");
    LinearScm scm;
    scm.graph = latent_expansion(g);
    scm.generator = "random";
    scm.seed = seed;
    scm.dims.assign(scm.graph.size(), 1);
    scm.noise.assign(scm.graph.size(), NoiseSpec::gaussian(0.0, options.noise_variance));
    for (std::size_t v = 0; v < scm.graph.size(); ++v)
        if (!scm.graph.node(v).observed) scm.noise[v] = options.latent;
    draw_with_positivity(scm, seed, options.weight_lo, options.weight_hi);
    return scm;
}

namespace {

void fill_noise(Eigen::MatrixXd& block, const NoiseSpec& spec, Rng& rng) {
    if (spec.kind == NoiseSpec::Kind::uniform) {
        std::uniform_real_distribution<double> dist(spec.a, spec.b);
        for (Eigen::Index i = 0; i < block.rows(); ++i)
            for (Eigen::Index k = 0; k < block.cols(); ++k) block(i, k) = dist(rng);
    } else {
        std::normal_distribution<double> dist(spec.a, std::sqrt(spec.b));
        for (Eigen::Index i = 0; i < block.rows(); ++i)
            for (Eigen::Index k = 0; k < block.cols(); ++k) block(i, k) = dist(rng);
    }
}

// Values of every node for one chunk of rows.
std::vector<Eigen::MatrixXd> simulate_chunk(const LinearScm& scm, const std::vector<std::size_t>& order,
                                            const std::vector<std::vector<std::size_t>>& in_edges, Eigen::Index rows,
                                            Seed chunk_seed, std::optional<int> intervention) {
    const Graph& g = scm.graph;
    const std::size_t t = *g.treatment();
    Rng rng(chunk_seed);
    std::vector<Eigen::MatrixXd> values(g.size());
    for (std::size_t v : order) {
        if (v == t) {
            Eigen::MatrixXd block(rows, 1);
            if (intervention) {
                block.setConstant(static_cast<double>(*intervention));
            } else {
                Eigen::VectorXd logit = Eigen::VectorXd::Constant(rows, scm.treatment_intercept);
                for (std::size_t e : in_edges[v]) {
                    const std::size_t p = g.directed()[e].first;
                    logit += (values[p].rowwise() - scm.means[p].transpose()) * scm.weights[e].transpose();
                }
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                for (Eigen::Index i = 0; i < rows; ++i) block(i, 0) = unit(rng) < sigmoid(logit[i]) ? 1.0 : 0.0;
            }
            values[v] = std::move(block);
            continue;
        }
        Eigen::MatrixXd block(rows, scm.dims[v]);
        fill_noise(block, scm.noise[v], rng);
        for (std::size_t e : in_edges[v]) {
            const std::size_t p = g.directed()[e].first;
            block.noalias() += values[p] * scm.weights[e].transpose();
        }
        values[v] = std::move(block);
    }
    return values;
}

}  // namespace

Dataset simulate(const LinearScm& scm, std::size_t n, Seed seed, const SimulateOptions& options) {
    if (n < 1) throw DatasetError("simulate needs n >= 1");
    if (options.chunk_rows < 1) throw DatasetError("chunk_rows must be positive");
    const Graph& g = scm.graph;
    const auto order = topological_order(g);
    std::vector<std::vector<std::size_t>> in_edges(g.size());
    for (std::size_t e = 0; e < g.directed().size(); ++e) in_edges[g.directed()[e].second].push_back(e);

    const std::size_t chunks = (n + options.chunk_rows - 1) / options.chunk_rows;
    std::vector<Eigen::MatrixXd> full(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) full[v].resize(static_cast<Eigen::Index>(n), scm.dims[v]);

    auto run_chunk = [&](std::size_t c) {
        const std::size_t begin = c * options.chunk_rows;
        const auto rows = static_cast<Eigen::Index>(std::min(options.chunk_rows, n - begin));
        auto values = simulate_chunk(scm, order, in_edges, rows, derive_seed(seed, c), options.intervention);
        for (std::size_t v = 0; v < g.size(); ++v)
            full[v].middleRows(static_cast<Eigen::Index>(begin), rows) = values[v];
    };
    if (options.exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) run_chunk(static_cast<std::size_t>(c));
    } else {
        for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    }

    Dataset data;
    const std::size_t t = *g.treatment();
    const std::size_t y = *g.outcome();
    data.treatment_id = g.node(t).id;
    data.outcome_id = g.node(y).id;
    data.treatment = full[t].col(0);
    data.outcome = full[y].col(0);
    for (std::size_t v = 0; v < g.size(); ++v) {
        const Node& node = g.node(v);
        if (node.role != Role::feature) continue;
        if (node.observed)
            data.features.push_back({node.id, std::move(full[v])});
        else if (options.keep_latents)
            data.latents.push_back({node.id, std::move(full[v])});
    }
    return data;
}

double treated_fraction(const LinearScm& scm, std::size_t n, Seed seed) {
    SimulateOptions options;
    options.exec = Exec::serial;
    return simulate(scm, n, seed, options).treatment.mean();
}

double true_ate_analytic(const LinearScm& scm) {
    const Graph& g = scm.graph;
    const std::size_t t = *g.treatment();
    const std::size_t y = *g.outcome();
    if (!g.has_directed(t, y)) return 0.0;
    for (std::size_t c : g.children(t))
        if (c != y)
            throw GraphError("analytic ATE needs the outcome to be the treatment's only child; found '" +
                             g.node(c).id + "'");
    return scm.treatment_effect();
}

AteEstimate true_ate_monte_carlo(const LinearScm& scm, std::size_t m, Seed seed) {
    SimulateOptions treated, control;
    treated.intervention = 1;
    control.intervention = 0;
    const Eigen::VectorXd y1 = simulate(scm, m, derive_seed(seed, 1), treated).outcome;
    const Eigen::VectorXd y0 = simulate(scm, m, derive_seed(seed, 2), control).outcome;
    const double md = static_cast<double>(m);
    auto variance = [&](const Eigen::VectorXd& v) {
        return m > 1 ? (v.array() - v.mean()).square().sum() / (md - 1.0) : 0.0;
    };
    return {y1.mean() - y0.mean(), std::sqrt(variance(y1) / md + variance(y0) / md)};
}

nlohmann::json scm_to_json(const LinearScm& scm) {
    using nlohmann::json;
    const Graph& g = scm.graph;
    json j;
    j["generator"] = scm.generator;
    j["d_tilde"] = scm.d_tilde;
    j["seed"] = scm.seed;
    j["graph"] = graph_to_json(g);
    json dims = json::object(), noise = json::object(), means = json::object();
    for (std::size_t v = 0; v < g.size(); ++v) {
        const auto& id = g.node(v).id;
        dims[id] = scm.dims[v];
        if (v == *g.treatment()) continue;
        const auto& spec = scm.noise[v];
        if (spec.kind == NoiseSpec::Kind::uniform)
            noise[id] = {{"kind", "uniform"}, {"low", spec.a}, {"high", spec.b}};
        else
            noise[id] = {{"kind", "gaussian"}, {"mean", spec.a}, {"variance", spec.b}};
        if (scm.means[v].size() > 0) means[id] = std::vector<double>(scm.means[v].data(), scm.means[v].data() + scm.means[v].size());
    }
    j["dims"] = dims;
    j["noise"] = noise;
    j["means"] = means;
    json weights = json::array();
    for (std::size_t e = 0; e < g.directed().size(); ++e) {
        const auto& [p, c] = g.directed()[e];
        json rows = json::array();
        for (Eigen::Index i = 0; i < scm.weights[e].rows(); ++i) {
            json row = json::array();
            for (Eigen::Index k = 0; k < scm.weights[e].cols(); ++k) row.push_back(scm.weights[e](i, k));
            rows.push_back(row);
        }
        weights.push_back({{"from", g.node(p).id}, {"to", g.node(c).id}, {"block", rows}});
    }
    j["weights"] = weights;
    j["treatment_intercept"] = scm.treatment_intercept;
    j["treatment_effect"] = scm.treatment_effect();
    return j;
}

LinearScm scm_from_json(const nlohmann::json& j) {
    LinearScm scm;
    scm.graph = graph_from_json(j.at("graph"));
    scm.generator = j.value("generator", std::string());
    scm.d_tilde = j.value("d_tilde", 0);
    scm.seed = j.value("seed", Seed{0});
    scm.treatment_intercept = j.value("treatment_intercept", 0.0);
    const Graph& g = scm.graph;
    scm.dims.assign(g.size(), 1);
    scm.noise.assign(g.size(), NoiseSpec::gaussian(0.0, 0.0));
    for (std::size_t v = 0; v < g.size(); ++v) {
        const auto& id = g.node(v).id;
        scm.dims[v] = j.at("dims").at(id).get<int>();
        if (j.at("noise").contains(id)) {
            const auto& n = j.at("noise").at(id);
            if (n.at("kind") == "uniform")
                scm.noise[v] = NoiseSpec::uniform(n.at("low").get<double>(), n.at("high").get<double>());
            else
                scm.noise[v] = NoiseSpec::gaussian(n.at("mean").get<double>(), n.at("variance").get<double>());
        }
    }
    scm.weights.assign(g.directed().size(), Eigen::MatrixXd());
    for (const auto& w : j.at("weights")) {
        const auto e = edge_position(g, w.at("from").get<std::string>(), w.at("to").get<std::string>());
        const auto& rows = w.at("block");
        Eigen::MatrixXd block(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.at(0).size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t k = 0; k < rows[i].size(); ++k)
                block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
        scm.weights[e] = block;
    }
    compute_means(scm);
    return scm;
}

}  // namespace adjset
