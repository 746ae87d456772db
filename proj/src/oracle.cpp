#include "adjset/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "adjset/graph_io.hpp"
#include "adjset/subsets.hpp"

namespace adjset {

namespace {

std::vector<NodeSet> subsets_of(const std::vector<std::string>& items) {
    if (static_cast<int>(items.size()) > kMaxEnumeratedFeatures)
        throw GraphError("too many observed features to enumerate (" + std::to_string(items.size()) + " > " +
                         std::to_string(kMaxEnumeratedFeatures) + ")");
    std::vector<NodeSet> out;
    for (const auto& c : enumerate_subsets(static_cast<int>(items.size()))) {
        NodeSet s;
        for (int i : c) s.insert(items[static_cast<std::size_t>(i)]);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::string> features_without(const Graph& g, const std::string& x) {
    std::vector<std::string> out;
    for (auto& f : g.observed_features())
        if (f != x) out.push_back(f);
    return out;
}

std::string env_id(const Graph& g) {
    std::string id = "e";
    while (g.contains(id)) id += "_";
    return id;
}

void require_anchor(const Graph& g, const std::string& x_t, bool allow_spouse) {
    if (!is_valid(g)) throw GraphError("invalid graph");
    if (!g.contains(x_t)) throw GraphError("unknown anchor '" + x_t + "'");
    const std::size_t a = g.index(x_t);
    const std::size_t t = *g.treatment();
    const bool direct = g.has_directed(a, t);
    const bool spouse = g.has_bidirected(a, t);
    if (!(direct || (allow_spouse && spouse)))
        throw GraphError("anchor '" + x_t + "' has no " + (allow_spouse ? "direct or bi-directed " : "direct ") +
                         "edge to the treatment");
}

// e _||_ y | Z, t for every Z, through one oracle on the augmented graph.
template <class Check>
OracleReport sweep(const Graph& g, const std::string& x_t, const NodeSet& v, const std::string& name, Check check) {
    const std::string e = env_id(g);
    const Graph augmented = attach_environment_node(g, x_t, v, e);
    const SeparationOracle oracle(augmented);
    const std::size_t ei = augmented.index(e);
    const std::size_t yi = *augmented.outcome();
    const std::size_t ti = *augmented.treatment();
    OracleReport report;
    report.check = name;
    report.anchor = x_t;
    report.v = v;
    report.graph = g;
    for (const auto& z : subsets_of(features_without(g, x_t))) {
        std::vector<bool> in_z(augmented.size(), false);
        in_z[ti] = true;
        for (const auto& id : z) in_z[augmented.index(id)] = true;
        const bool sep = oracle.separated(ei, yi, in_z);
        const bool bd = satisfies_backdoor(g, z, BackdoorMethod::definition);
        ++report.subsets_checked;
        if (!check(bd, sep)) report.mismatches.push_back({z, bd, sep});
    }
    return report;
}

}  // namespace

SubsetFamily enumerate_backdoor_sets(const Graph& g, const std::optional<std::string>& exclude) {
    SubsetFamily out;
    for (auto& z : subsets_of(features_without(g, exclude.value_or(""))))
        if (satisfies_backdoor(g, z, BackdoorMethod::definition)) out.insert(z);
    return out;
}

OracleReport verify_parent_anchor(const Graph& g, const std::string& x_t, const NodeSet& v) {
    require_anchor(g, x_t, false);
    if (!satisfies_sink_outcome(g)) throw GraphError("t must have y as its only child and y must be a sink");
    const std::string& t = g.node(*g.treatment()).id;
    for (const auto& id : v)
        if (id != t) throw GraphError("V must be a subset of {" + t + "}");
    return sweep(g, x_t, v, "parent_anchor", [](bool bd, bool sep) { return bd == sep; });
}

OracleReport verify_spouse_anchor(const Graph& g, const std::string& x_t, const NodeSet& v) {
    require_anchor(g, x_t, true);
    if (!satisfies_sink_outcome(g)) throw GraphError("t must have y as its only child and y must be a sink");
    return sweep(g, x_t, v, "spouse_anchor", [](bool bd, bool sep) { return !sep || bd; });
}

nlohmann::json oracle_report_to_json(const OracleReport& r) {
    nlohmann::json mism = nlohmann::json::array();
    for (const auto& m : r.mismatches)
        mism.push_back({{"z", std::vector<std::string>(m.z.begin(), m.z.end())},
                        {"backdoor", m.backdoor},
                        {"separated", m.separated}});
    return {{"check", r.check},
            {"anchor", r.anchor},
            {"v", std::vector<std::string>(r.v.begin(), r.v.end())},
            {"subsets_checked", r.subsets_checked},
            {"agree", r.agree()},
            {"mismatches", mism},
            {"graph", graph_to_json(r.graph)}};
}

Graph graph_for_assignment(const Graph& g, const EnvAssignment& env) {
    if (!g.contains(env.anchor)) throw GraphError("anchor '" + env.anchor + "' is not in the graph");
    const NodeSet v = env.include_t ? NodeSet{g.node(*g.treatment()).id} : NodeSet{};
    return attach_environment_node(g, env.anchor, v, env_id(g));
}

Graph random_sink_outcome_graph(const RandomGraphOptions& options, Seed seed) {
    if (options.n_observed < 3)
        throw GraphError("n_observed counts t and y and must be at least 3 so that t has a feature parent");
    if (!(options.density >= 0.0 && options.density <= 1.0)) throw GraphError("density must lie in [0, 1]");
    const int k = options.n_observed - 2;
    const int n_bi = options.n_bidirected.value_or((options.n_observed + 1) / 2);
    if (n_bi < 0) throw GraphError("negative bi-directed edge count");
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::string> feats;
    for (int i = 1; i <= k; ++i) feats.push_back("x" + std::to_string(i));
    std::vector<std::string> order = feats;
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::pair<std::string, std::string>> directed, bidirected;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (unit(rng) < options.density) directed.emplace_back(order[i], order[j]);
    bool t_parent = false;
    for (const auto& f : feats)
        if (unit(rng) < options.density) {
            directed.emplace_back(f, "t");
            t_parent = true;
        }
    if (!t_parent) directed.emplace_back(feats[std::uniform_int_distribution<int>(0, k - 1)(rng)], "t");
    directed.emplace_back("t", "y");
    for (const auto& f : feats)
        if (unit(rng) < options.density) directed.emplace_back(f, "y");

    std::vector<std::string> observed = feats;
    observed.push_back("t");
    observed.push_back("y");
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < observed.size(); ++i)
        for (std::size_t j = i + 1; j < observed.size(); ++j) {
            const bool at_t = observed[i] == "t" || observed[j] == "t";
            if (at_t && !options.treatment_bidirected) continue;
            pairs.emplace_back(observed[i], observed[j]);
        }
    std::shuffle(pairs.begin(), pairs.end(), rng);
    int need = n_bi;
    if (!options.n_bidirected) need = std::min(need, static_cast<int>(pairs.size()) + options.require_spouse_anchor);
    if (options.require_spouse_anchor) {
        if (!options.treatment_bidirected) throw GraphError("a spouse anchor needs bi-directed edges at t");
        const std::string s = feats[std::uniform_int_distribution<int>(0, k - 1)(rng)];
        bidirected.emplace_back(s, "t");
        pairs.erase(std::remove(pairs.begin(), pairs.end(), std::make_pair(s, std::string("t"))), pairs.end());
        need = std::max(0, need - 1);
    }
    if (need > static_cast<int>(pairs.size()))
        throw GraphError("infeasible: " + std::to_string(n_bi) + " bi-directed edges requested, only " +
                         std::to_string(pairs.size() + bidirected.size()) + " node pairs available");
    for (int i = 0; i < need; ++i) bidirected.push_back(pairs[static_cast<std::size_t>(i)]);

    std::vector<Node> nodes;
    for (const auto& f : feats) nodes.push_back({f, Role::feature, true});
    nodes.push_back({"t", Role::treatment, true});
    nodes.push_back({"y", Role::outcome, true});
    return Graph(std::move(nodes), directed, bidirected);
}

std::vector<NodeSet> backdoor_route_disagreements(const Graph& g) {
    std::vector<NodeSet> out;
    for (const auto& z : subsets_of(g.observed_features()))
        if (satisfies_backdoor(g, z, BackdoorMethod::definition) != satisfies_backdoor(g, z, BackdoorMethod::pruned_graph))
            out.push_back(z);
    return out;
}

ValidationSummary run_validation(const ValidationOptions& options, Seed seed) {
    if (options.graphs < 0) throw GraphError("graph count must be non-negative");
    if (options.max_observed < 3) throw GraphError("max_observed must be at least 3");
    struct PerGraph {
        std::size_t parent = 0, spouse = 0, routes = 0;
        std::vector<OracleReport> bad;
        bool route_failure = false;
        Graph graph;
    };
    std::vector<PerGraph> results(static_cast<std::size_t>(options.graphs));
    auto one = [&](int i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        RandomGraphOptions go;
        go.n_observed = std::uniform_int_distribution<int>(3, options.max_observed)(rng);
        go.n_bidirected = std::uniform_int_distribution<int>(0, (go.n_observed + 1) / 2)(rng);
        go.density = options.density;
        const Graph g = random_sink_outcome_graph(go, derive_seed(seed, static_cast<std::uint64_t>(i), 1));
        auto& out = results[static_cast<std::size_t>(i)];
        out.graph = g;
        const std::size_t t = *g.treatment();
        const std::string& tid = g.node(t).id;
        for (std::size_t p : g.parents(t))
            for (const NodeSet& v : {NodeSet{}, NodeSet{tid}}) {
                auto r = verify_parent_anchor(g, g.node(p).id, v);
                out.parent += r.subsets_checked;
                if (!r.agree()) out.bad.push_back(std::move(r));
            }
        for (std::size_t s : g.spouses(t)) {
            if (g.node(s).role != Role::feature) continue;
            auto r = verify_spouse_anchor(g, g.node(s).id, NodeSet{tid});
            out.spouse += r.subsets_checked;
            if (!r.agree()) out.bad.push_back(std::move(r));
        }
        out.routes = std::size_t{1} << g.observed_features().size();
        out.route_failure = !backdoor_route_disagreements(g).empty();
    };
    if (options.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < options.graphs; ++i) one(i);
    } else {
        for (int i = 0; i < options.graphs; ++i) one(i);
    }
    ValidationSummary summary;
    summary.graphs = options.graphs;
    for (auto& r : results) {
        summary.parent_checks += r.parent;
        summary.spouse_checks += r.spouse;
        summary.route_checks += r.routes;
        for (auto& b : r.bad) summary.counterexamples.push_back(std::move(b));
        if (r.route_failure) summary.route_failures.push_back(r.graph);
    }
    return summary;
}

nlohmann::json validation_to_json(const ValidationSummary& s) {
    nlohmann::json ce = nlohmann::json::array();
    for (const auto& r : s.counterexamples) ce.push_back(oracle_report_to_json(r));
    nlohmann::json rf = nlohmann::json::array();
    for (const auto& g : s.route_failures) rf.push_back(graph_to_json(g));
    return {{"graphs", s.graphs},
            {"parent_checks", s.parent_checks},
            {"spouse_checks", s.spouse_checks},
            {"route_checks", s.route_checks},
            {"counterexamples", ce},
            {"route_failures", rf}};
}

}  // namespace adjset
