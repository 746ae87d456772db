#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace adjset {

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Role { feature, treatment, outcome, environment };

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

struct Node {
    std::string id;
    Role role = Role::feature;
    bool observed = true;
};

using NodeSet = std::set<std::string, std::less<>>;
using Edge = std::pair<std::size_t, std::size_t>;

/// Semi-Markovian causal graph: directed edges plus bi-directed edges that
/// stand for a hidden common cause of two observed nodes.
///
/// Construction only checks referential integrity (known ids, no duplicate
/// nodes, no self loops). Structural rules such as acyclicity and role counts
/// are reported by validate_graph() so that malformed graphs can still be
/// inspected. Instances are immutable; every query is const and thread-safe.
class Graph {
public:
    Graph() = default;
    Graph(std::vector<Node> nodes,
          const std::vector<std::pair<std::string, std::string>>& directed,
          const std::vector<std::pair<std::string, std::string>>& bidirected);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(std::size_t i) const { return nodes_.at(i); }

    bool contains(std::string_view id) const;
    /// Throws GraphError for an unknown id.
    std::size_t index(std::string_view id) const;

    /// Directed edges (parent, child), sorted by (parent id, child id).
    const std::vector<Edge>& directed() const { return directed_; }
    /// Bi-directed edges, each stored with the lexicographically smaller id first.
    const std::vector<Edge>& bidirected() const { return bidirected_; }

    const std::vector<std::size_t>& parents(std::size_t v) const { return parents_.at(v); }
    const std::vector<std::size_t>& children(std::size_t v) const { return children_.at(v); }
    const std::vector<std::size_t>& spouses(std::size_t v) const { return spouses_.at(v); }

    bool has_directed(std::size_t from, std::size_t to) const;
    bool has_bidirected(std::size_t a, std::size_t b) const;

    std::optional<std::size_t> treatment() const { return find_role(Role::treatment); }
    std::optional<std::size_t> outcome() const { return find_role(Role::outcome); }
    std::optional<std::size_t> environment() const { return find_role(Role::environment); }

    /// Observed nodes with role feature, in id order.
    std::vector<std::string> observed_features() const;

private:
    std::optional<std::size_t> find_role(Role role) const;

    std::vector<Node> nodes_;
    std::vector<Edge> directed_;
    std::vector<Edge> bidirected_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::vector<std::size_t>> spouses_;
};

enum class ViolationKind {
    cycle,
    treatment_count,
    outcome_count,
    treatment_unobserved,
    outcome_unobserved,
    bidirected_unobserved,
    environment_count,
    environment_has_children,
    treatment_non_outcome_child,
    treatment_missing_outcome_edge,
    outcome_has_child,
};

struct Violation {
    ViolationKind kind;
    std::string message;
    std::vector<std::string> nodes;
};

enum class Strictness { structural, sink_outcome };

/// Every violated structural invariant. With Strictness::sink_outcome also
/// reports breaches of "treatment's only child is the outcome, outcome has no
/// child".
std::vector<Violation> validate_graph(const Graph& g, Strictness strictness = Strictness::structural);
bool is_valid(const Graph& g, Strictness strictness = Strictness::structural);
bool satisfies_sink_outcome(const Graph& g);

/// Topological order of all nodes (directed edges only). Throws on a cycle.
std::vector<std::size_t> topological_order(const Graph& g);

/// Replaces each bi-directed edge a<->b by a fresh unobserved node h with
/// edges h->a and h->b. Hidden nodes are named u1, u2, ... in the order of
/// the sorted bi-directed edge list, skipping names already in use.
Graph latent_expansion(const Graph& g);

/// Nodes reachable from v by directed edges, excluding v.
NodeSet descendants(const Graph& g, std::string_view v);
std::vector<bool> descendant_mask(const Graph& g, std::size_t v);

/// d-separation of a and b given z (reachability on the latent expansion).
bool d_separated(const Graph& g, std::string_view a, std::string_view b, const NodeSet& z);

/// Reference d-separation: enumerates every simple path of the semi-Markovian
/// graph, bi-directed edges included, and applies the collider rules directly.
/// Exponential; intended for graphs of at most a dozen nodes.
bool d_separated_by_paths(const Graph& g, std::string_view a, std::string_view b, const NodeSet& z);

/// Precomputed reachability engine for repeated d-separation queries on one
/// graph. Indices refer to the original graph passed in.
class SeparationOracle {
public:
    explicit SeparationOracle(const Graph& g);
    bool separated(std::size_t a, std::size_t b, const std::vector<bool>& in_z) const;
    const Graph& graph() const { return original_; }

private:
    Graph original_;
    Graph expanded_;
    std::vector<std::size_t> to_expanded_;
};

enum class EdgeKind { forward, backward, bidirected };

struct Path {
    std::vector<std::string> nodes;
    std::vector<EdgeKind> steps;  // steps[i] joins nodes[i] and nodes[i+1]
};

/// All simple paths between a and b in the semi-Markovian graph.
std::vector<Path> enumerate_paths(const Graph& g, std::string_view a, std::string_view b);
bool path_blocked(const Graph& g, const Path& path, const NodeSet& z);

/// Copy of g without the treatment->outcome edge. Throws if it is absent.
Graph g_minus_t(const Graph& g);

enum class BackdoorMethod {
    definition,     // descendant check + blocking of every path with an arrow into t
    pruned_graph,   // d-separation of t and y in the graph without t->y
};

/// Back-door criterion for (treatment, outcome). Z must hold observed
/// features only.
bool satisfies_backdoor(const Graph& g, const NodeSet& z, BackdoorMethod method = BackdoorMethod::pruned_graph);

/// Adds an environment node with parents {anchor} ∪ v and no children.
Graph attach_environment_node(const Graph& g, std::string_view anchor, const NodeSet& v,
                              std::string_view env_id = "e");

}  // namespace adjset
