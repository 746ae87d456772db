#include "adjset/graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <numeric>

namespace adjset {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::feature: return "feature";
        case Role::treatment: return "treatment";
        case Role::outcome: return "outcome";
        case Role::environment: return "environment";
    }
    return "feature";
}

Role role_from_string(std::string_view text) {
    if (text == "feature") return Role::feature;
    if (text == "treatment") return Role::treatment;
    if (text == "outcome") return Role::outcome;
    if (text == "environment") return Role::environment;
    throw GraphError("unknown node role '" + std::string(text) + "'");
}

Graph::Graph(std::vector<Node> nodes,
             const std::vector<std::pair<std::string, std::string>>& directed,
             const std::vector<std::pair<std::string, std::string>>& bidirected)
    : nodes_(std::move(nodes)) {
    std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id.empty()) throw GraphError("empty node id");
        if (i > 0 && nodes_[i].id == nodes_[i - 1].id) throw GraphError("duplicate node id '" + nodes_[i].id + "'");
    }
    parents_.assign(nodes_.size(), {});
    children_.assign(nodes_.size(), {});
    spouses_.assign(nodes_.size(), {});

    for (const auto& [from, to] : directed) {
        const std::size_t a = index(from);
        const std::size_t b = index(to);
        if (a == b) throw GraphError("self loop on '" + from + "'");
        directed_.emplace_back(a, b);
    }
    for (const auto& [first, second] : bidirected) {
        std::size_t a = index(first);
        std::size_t b = index(second);
        if (a == b) throw GraphError("bi-directed self loop on '" + first + "'");
        if (a > b) std::swap(a, b);
        bidirected_.emplace_back(a, b);
    }
    std::sort(directed_.begin(), directed_.end());
    std::sort(bidirected_.begin(), bidirected_.end());
    if (std::adjacent_find(directed_.begin(), directed_.end()) != directed_.end())
        throw GraphError("duplicate directed edge");
    if (std::adjacent_find(bidirected_.begin(), bidirected_.end()) != bidirected_.end())
        throw GraphError("duplicate bi-directed edge");

    for (const auto& [a, b] : directed_) {
        children_[a].push_back(b);
        parents_[b].push_back(a);
    }
    for (const auto& [a, b] : bidirected_) {
        spouses_[a].push_back(b);
        spouses_[b].push_back(a);
    }
    for (auto& list : spouses_) std::sort(list.begin(), list.end());
    for (auto& list : parents_) std::sort(list.begin(), list.end());
}

bool Graph::contains(std::string_view id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const Node& n, std::string_view key) { return n.id < key; });
    return it != nodes_.end() && it->id == id;
}

std::size_t Graph::index(std::string_view id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const Node& n, std::string_view key) { return n.id < key; });
    if (it == nodes_.end() || it->id != id) throw GraphError("unknown node '" + std::string(id) + "'");
    return static_cast<std::size_t>(it - nodes_.begin());
}

bool Graph::has_directed(std::size_t from, std::size_t to) const {
    return std::binary_search(directed_.begin(), directed_.end(), Edge{from, to});
}

bool Graph::has_bidirected(std::size_t a, std::size_t b) const {
    if (a > b) std::swap(a, b);
    return std::binary_search(bidirected_.begin(), bidirected_.end(), Edge{a, b});
}

std::vector<std::string> Graph::observed_features() const {
    std::vector<std::string> out;
    for (const auto& n : nodes_)
        if (n.role == Role::feature && n.observed) out.push_back(n.id);
    return out;
}

std::optional<std::size_t> Graph::find_role(Role role) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].role == role) return i;
    return std::nullopt;
}

namespace {

// Kahn's algorithm; returns the nodes left over when a cycle exists.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> kahn(const Graph& g) {
    std::vector<std::size_t> indegree(g.size(), 0);
    for (const auto& e : g.directed()) ++indegree[e.second];
    std::deque<std::size_t> ready;
    for (std::size_t v = 0; v < g.size(); ++v)
        if (indegree[v] == 0) ready.push_back(v);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        const std::size_t v = ready.front();
        ready.pop_front();
        order.push_back(v);
        for (std::size_t c : g.children(v))
            if (--indegree[c] == 0) ready.push_back(c);
    }
    std::vector<std::size_t> rest;
    for (std::size_t v = 0; v < g.size(); ++v)
        if (indegree[v] > 0) rest.push_back(v);
    return {order, rest};
}

std::vector<std::string> ids(const Graph& g, const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(g.node(i).id);
    return out;
}

void require_valid(const Graph& g) {
    auto violations = validate_graph(g);
    if (!violations.empty()) throw GraphError("invalid graph: " + violations.front().message);
}

}  // namespace

std::vector<std::size_t> topological_order(const Graph& g) {
    auto [order, rest] = kahn(g);
    if (!rest.empty()) throw GraphError("graph has a directed cycle");
    return order;
}

std::vector<Violation> validate_graph(const Graph& g, Strictness strictness) {
    std::vector<Violation> out;
    if (auto rest = kahn(g).second; !rest.empty())
        out.push_back({ViolationKind::cycle, "cycle", ids(g, rest)});

    std::vector<std::size_t> treatments, outcomes, envs;
    for (std::size_t i = 0; i < g.size(); ++i) {
        switch (g.node(i).role) {
            case Role::treatment: treatments.push_back(i); break;
            case Role::outcome: outcomes.push_back(i); break;
            case Role::environment: envs.push_back(i); break;
            case Role::feature: break;
        }
    }
    if (treatments.size() != 1)
        out.push_back({ViolationKind::treatment_count, "expected exactly one treatment node", ids(g, treatments)});
    if (outcomes.size() != 1)
        out.push_back({ViolationKind::outcome_count, "expected exactly one outcome node", ids(g, outcomes)});
    for (auto t : treatments)
        if (!g.node(t).observed)
            out.push_back({ViolationKind::treatment_unobserved, "treatment must be observed", {g.node(t).id}});
    for (auto y : outcomes)
        if (!g.node(y).observed)
            out.push_back({ViolationKind::outcome_unobserved, "outcome must be observed", {g.node(y).id}});
    for (const auto& [a, b] : g.bidirected())
        if (!g.node(a).observed || !g.node(b).observed)
            out.push_back({ViolationKind::bidirected_unobserved, "bi-directed edge touches an unobserved node",
                           {g.node(a).id, g.node(b).id}});
    if (envs.size() > 1)
        out.push_back({ViolationKind::environment_count, "at most one environment node allowed", ids(g, envs)});
    for (auto e : envs)
        if (!g.children(e).empty())
            out.push_back({ViolationKind::environment_has_children, "environment node has outgoing edges",
                           ids(g, g.children(e))});

    if (strictness == Strictness::sink_outcome && treatments.size() == 1 && outcomes.size() == 1) {
        const std::size_t t = treatments.front();
        const std::size_t y = outcomes.front();
        // The synthetic environment node is a sink added after the fact; it
        // does not count as a child for this check.
        for (std::size_t c : g.children(t))
            if (c != y && g.node(c).role != Role::environment)
                out.push_back({ViolationKind::treatment_non_outcome_child, "treatment has non-outcome child",
                               {g.node(t).id, g.node(c).id}});
        if (!g.has_directed(t, y))
            out.push_back({ViolationKind::treatment_missing_outcome_edge, "treatment has no edge to the outcome",
                           {g.node(t).id, g.node(y).id}});
        for (std::size_t c : g.children(y))
            if (g.node(c).role != Role::environment)
                out.push_back({ViolationKind::outcome_has_child, "outcome has a child", {g.node(y).id, g.node(c).id}});
    }
    return out;
}

bool is_valid(const Graph& g, Strictness strictness) { return validate_graph(g, strictness).empty(); }

bool satisfies_sink_outcome(const Graph& g) { return is_valid(g, Strictness::sink_outcome); }

Graph latent_expansion(const Graph& g) {
    if (g.bidirected().empty()) return g;
    std::vector<Node> nodes = g.nodes();
    std::vector<std::pair<std::string, std::string>> directed;
    for (const auto& [a, b] : g.directed()) directed.emplace_back(g.node(a).id, g.node(b).id);

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& [a, b] : g.bidirected()) pairs.emplace_back(g.node(a).id, g.node(b).id);
    std::sort(pairs.begin(), pairs.end());

    int counter = 1;
    for (const auto& [a, b] : pairs) {
        std::string name;
        do {
            name = "u" + std::to_string(counter++);
        } while (g.contains(name));
        nodes.push_back({name, Role::feature, false});
        directed.emplace_back(name, a);
        directed.emplace_back(name, b);
    }
    return Graph(std::move(nodes), directed, {});
}

std::vector<bool> descendant_mask(const Graph& g, std::size_t v) {
    std::vector<bool> seen(g.size(), false);
    std::vector<std::size_t> stack(g.children(v).begin(), g.children(v).end());
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        if (seen[u]) continue;
        seen[u] = true;
        for (std::size_t c : g.children(u))
            if (!seen[c]) stack.push_back(c);
    }
    seen[v] = false;
    return seen;
}

NodeSet descendants(const Graph& g, std::string_view v) {
    const auto mask = descendant_mask(g, g.index(v));
    NodeSet out;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (mask[i]) out.insert(g.node(i).id);
    return out;
}

namespace {

std::vector<bool> mask_of(const Graph& g, std::string_view a, std::string_view b, const NodeSet& z) {
    g.index(a);
    g.index(b);
    if (a == b) throw GraphError("d-separation query needs two distinct nodes");
    std::vector<bool> in_z(g.size(), false);
    for (const auto& id : z) {
        if (id == a || id == b) throw GraphError("query node '" + id + "' is inside the conditioning set");
        in_z[g.index(id)] = true;
    }
    return in_z;
}

}  // namespace

SeparationOracle::SeparationOracle(const Graph& g) : original_(g), expanded_(latent_expansion(g)) {
    to_expanded_.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) to_expanded_[i] = expanded_.index(g.node(i).id);
}

bool SeparationOracle::separated(std::size_t a, std::size_t b, const std::vector<bool>& in_z) const {
    const Graph& h = expanded_;
    std::vector<bool> z(h.size(), false);
    for (std::size_t i = 0; i < in_z.size(); ++i)
        if (in_z[i]) z[to_expanded_[i]] = true;
    const std::size_t src = to_expanded_[a];
    const std::size_t dst = to_expanded_[b];

    // Nodes that are in Z or have a descendant in Z.
    std::vector<bool> anc(h.size(), false);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (z[i]) stack.push_back(i);
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        if (anc[u]) continue;
        anc[u] = true;
        for (std::size_t p : h.parents(u))
            if (!anc[p]) stack.push_back(p);
    }

    // Reachable-set search over (node, direction). `up` means the trail
    // arrived from a child; `down` means it arrived from a parent.
    enum Dir { up = 0, down = 1 };
    std::vector<std::array<bool, 2>> visited(h.size(), {false, false});
    std::vector<std::pair<std::size_t, Dir>> frontier{{src, up}};
    while (!frontier.empty()) {
        auto [v, dir] = frontier.back();
        frontier.pop_back();
        if (visited[v][dir]) continue;
        visited[v][dir] = true;
        if (v == dst && !z[v]) return false;
        if (dir == up && !z[v]) {
            for (std::size_t p : h.parents(v)) frontier.emplace_back(p, up);
            for (std::size_t c : h.children(v)) frontier.emplace_back(c, down);
        } else if (dir == down) {
            if (!z[v])
                for (std::size_t c : h.children(v)) frontier.emplace_back(c, down);
            if (anc[v])
                for (std::size_t p : h.parents(v)) frontier.emplace_back(p, up);
        }
    }
    return true;
}

bool d_separated(const Graph& g, std::string_view a, std::string_view b, const NodeSet& z) {
    const auto in_z = mask_of(g, a, b, z);
    return SeparationOracle(g).separated(g.index(a), g.index(b), in_z);
}

namespace {

struct Step {
    std::size_t to;
    EdgeKind kind;
};

std::vector<std::vector<Step>> adjacency(const Graph& g) {
    std::vector<std::vector<Step>> adj(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
        for (std::size_t c : g.children(v)) adj[v].push_back({c, EdgeKind::forward});
        for (std::size_t p : g.parents(v)) adj[v].push_back({p, EdgeKind::backward});
        for (std::size_t s : g.spouses(v)) adj[v].push_back({s, EdgeKind::bidirected});
    }
    return adj;
}

struct IndexPath {
    std::vector<std::size_t> nodes;
    std::vector<EdgeKind> steps;
};

void collect_paths(const std::vector<std::vector<Step>>& adj, std::size_t target, IndexPath& current,
                   std::vector<bool>& on_path, std::vector<IndexPath>& out) {
    const std::size_t v = current.nodes.back();
    if (v == target) {
        out.push_back(current);
        return;
    }
    for (const Step& s : adj[v]) {
        if (on_path[s.to]) continue;
        on_path[s.to] = true;
        current.nodes.push_back(s.to);
        current.steps.push_back(s.kind);
        collect_paths(adj, target, current, on_path, out);
        current.nodes.pop_back();
        current.steps.pop_back();
        on_path[s.to] = false;
    }
}

std::vector<IndexPath> index_paths(const Graph& g, std::size_t a, std::size_t b) {
    auto adj = adjacency(g);
    std::vector<IndexPath> out;
    IndexPath current{{a}, {}};
    std::vector<bool> on_path(g.size(), false);
    on_path[a] = true;
    collect_paths(adj, b, current, on_path, out);
    return out;
}

bool index_path_blocked(const Graph& g, const IndexPath& path, const std::vector<bool>& in_z,
                        std::vector<std::optional<std::vector<bool>>>& desc_cache) {
    for (std::size_t i = 1; i + 1 < path.nodes.size(); ++i) {
        const std::size_t v = path.nodes[i];
        const EdgeKind left = path.steps[i - 1];
        const EdgeKind right = path.steps[i];
        const bool head_from_left = left == EdgeKind::forward || left == EdgeKind::bidirected;
        const bool head_from_right = right == EdgeKind::backward || right == EdgeKind::bidirected;
        if (head_from_left && head_from_right) {
            if (in_z[v]) continue;
            if (!desc_cache[v]) desc_cache[v] = descendant_mask(g, v);
            bool opened = false;
            for (std::size_t u = 0; u < g.size(); ++u)
                if ((*desc_cache[v])[u] && in_z[u]) {
                    opened = true;
                    break;
                }
            if (!opened) return true;
        } else if (in_z[v]) {
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<Path> enumerate_paths(const Graph& g, std::string_view a, std::string_view b) {
    std::vector<Path> out;
    for (auto& p : index_paths(g, g.index(a), g.index(b))) out.push_back({ids(g, p.nodes), p.steps});
    return out;
}

bool path_blocked(const Graph& g, const Path& path, const NodeSet& z) {
    IndexPath ip;
    for (const auto& id : path.nodes) ip.nodes.push_back(g.index(id));
    ip.steps = path.steps;
    std::vector<bool> in_z(g.size(), false);
    for (const auto& id : z) in_z[g.index(id)] = true;
    std::vector<std::optional<std::vector<bool>>> cache(g.size());
    return index_path_blocked(g, ip, in_z, cache);
}

bool d_separated_by_paths(const Graph& g, std::string_view a, std::string_view b, const NodeSet& z) {
    const auto in_z = mask_of(g, a, b, z);
    std::vector<std::optional<std::vector<bool>>> cache(g.size());
    for (const auto& p : index_paths(g, g.index(a), g.index(b)))
        if (!index_path_blocked(g, p, in_z, cache)) return false;
    return true;
}

Graph g_minus_t(const Graph& g) {
    const auto t = g.treatment();
    const auto y = g.outcome();
    if (!t || !y) throw GraphError("graph needs a treatment and an outcome");
    if (!g.has_directed(*t, *y)) throw GraphError("graph has no treatment->outcome edge");
    std::vector<std::pair<std::string, std::string>> directed, bidirected;
    for (const auto& [a, b] : g.directed())
        if (!(a == *t && b == *y)) directed.emplace_back(g.node(a).id, g.node(b).id);
    for (const auto& [a, b] : g.bidirected()) bidirected.emplace_back(g.node(a).id, g.node(b).id);
    return Graph(g.nodes(), directed, bidirected);
}

bool satisfies_backdoor(const Graph& g, const NodeSet& z, BackdoorMethod method) {
    require_valid(g);
    const std::size_t t = *g.treatment();
    const std::size_t y = *g.outcome();
    std::vector<bool> in_z(g.size(), false);
    for (const auto& id : z) {
        const std::size_t i = g.index(id);
        const Node& n = g.node(i);
        if (n.role != Role::feature)
            throw GraphError("adjustment set may not contain the " + std::string(to_string(n.role)) + " node '" +
                             id + "'");
        if (!n.observed) throw GraphError("adjustment set may not contain unobserved node '" + id + "'");
        in_z[i] = true;
    }

    if (method == BackdoorMethod::pruned_graph) {
        const Graph pruned = g.has_directed(t, y) ? g_minus_t(g) : g;
        return SeparationOracle(pruned).separated(t, y, in_z);
    }

    const auto desc = descendant_mask(g, t);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (in_z[i] && desc[i]) return false;
    std::vector<std::optional<std::vector<bool>>> cache(g.size());
    for (const auto& p : index_paths(g, t, y)) {
        const EdgeKind first = p.steps.front();
        if (first == EdgeKind::forward) continue;  // no arrow into t
        if (!index_path_blocked(g, p, in_z, cache)) return false;
    }
    return true;
}

Graph attach_environment_node(const Graph& g, std::string_view anchor, const NodeSet& v, std::string_view env_id) {
    if (g.environment()) throw GraphError("graph already has an environment node");
    if (g.contains(env_id)) throw GraphError("node id '" + std::string(env_id) + "' already in use");
    const std::size_t xt = g.index(anchor);
    if (g.node(xt).role != Role::feature || !g.node(xt).observed)
        throw GraphError("anchor '" + std::string(anchor) + "' must be an observed feature");
    const auto y = g.outcome();
    for (const auto& id : v) {
        const std::size_t i = g.index(id);
        if (id == anchor) throw GraphError("sub-sampling set may not contain the anchor");
        if (y && i == *y) throw GraphError("sub-sampling set may not contain the outcome");
        if (!g.node(i).observed) throw GraphError("sub-sampling set may only contain observed nodes");
    }
    std::vector<Node> nodes = g.nodes();
    nodes.push_back({std::string(env_id), Role::environment, true});
    std::vector<std::pair<std::string, std::string>> directed, bidirected;
    for (const auto& [a, b] : g.directed()) directed.emplace_back(g.node(a).id, g.node(b).id);
    for (const auto& [a, b] : g.bidirected()) bidirected.emplace_back(g.node(a).id, g.node(b).id);
    directed.emplace_back(std::string(anchor), std::string(env_id));
    for (const auto& id : v) directed.emplace_back(id, std::string(env_id));
    return Graph(std::move(nodes), directed, bidirected);
}

}  // namespace adjset
