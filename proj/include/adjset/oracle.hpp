#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adjset/envgen.hpp"
#include "adjset/exec.hpp"
#include "adjset/graph.hpp"
#include "adjset/rng.hpp"
#include "adjset/search.hpp"

namespace adjset {

inline constexpr int kMaxEnumeratedFeatures = 20;

/// Every Z among the observed features (minus `exclude`) satisfying the
/// back-door criterion, by brute force.
SubsetFamily enumerate_backdoor_sets(const Graph& g, const std::optional<std::string>& exclude = std::nullopt);

struct Mismatch {
    NodeSet z;
    bool backdoor = false;
    bool separated = false;
};

struct OracleReport {
    std::string check;  // "parent_anchor" or "spouse_anchor"
    std::string anchor;
    NodeSet v;
    std::size_t subsets_checked = 0;
    std::vector<Mismatch> mismatches;
    Graph graph;

    bool agree() const { return mismatches.empty(); }
};

nlohmann::json oracle_report_to_json(const OracleReport& r);

/// For every Z among the observed features other than x_t: back-door(Z)
/// iff e is d-separated from y by Z and t, with e attached to x_t and V.
OracleReport verify_parent_anchor(const Graph& g, const std::string& x_t, const NodeSet& v);

/// One direction only: d-separation of e and y by Z and t implies back-door.
/// x_t may be a parent or a bi-directed neighbour of t.
OracleReport verify_spouse_anchor(const Graph& g, const std::string& x_t, const NodeSet& v);

/// Graph counterpart of an environment assignment.
Graph graph_for_assignment(const Graph& g, const EnvAssignment& env);

struct RandomGraphOptions {
    int n_observed = 5;                 // features plus t and y
    std::optional<int> n_bidirected;    // default ceil(n_observed / 2), capped by the free pairs
    double density = 0.3;
    bool treatment_bidirected = true;   // allow bi-directed edges at t
    bool require_spouse_anchor = false; // force a feature <-> t edge
};

/// Features x1..xk (k = n_observed - 2) in random topological order, t with
/// at least one feature parent, y with parent t plus random features, and
/// distinct random bi-directed pairs. t -> y is the only edge out of t and y is a sink.
Graph random_sink_outcome_graph(const RandomGraphOptions& options, Seed seed);

/// Auxiliary check of the two back-door routes on every Z of g.
std::vector<NodeSet> backdoor_route_disagreements(const Graph& g);

struct ValidationOptions {
    int graphs = 200;
    int max_observed = 6;
    double density = 0.3;
    Exec exec = Exec::parallel;
};

struct ValidationSummary {
    int graphs = 0;
    std::size_t parent_checks = 0;
    std::size_t spouse_checks = 0;
    std::size_t route_checks = 0;
    std::vector<OracleReport> counterexamples;
    std::vector<Graph> route_failures;
};

/// Random sweep: every direct anchor with V = {} and V = {t}, every spouse
/// anchor with V = {t}, and the two back-door routes, on each graph.
ValidationSummary run_validation(const ValidationOptions& options, Seed seed);

nlohmann::json validation_to_json(const ValidationSummary& s);

}  // namespace adjset
