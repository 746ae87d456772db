#include <doctest.h>

#include <algorithm>

#include "adjset/fixtures.hpp"
#include "adjset/graph.hpp"
#include "adjset/oracle.hpp"
#include "helpers.hpp"

using namespace adjset;
using testing::features;

namespace {

bool has_kind(const std::vector<Violation>& v, ViolationKind k) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == k; });
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("construction rejects dangling ids, duplicates and self loops") {
    CHECK_THROWS_AS(Graph(features({"x1"}), {{"x1", "q"}}, {}), GraphError);
    CHECK_THROWS_AS(Graph(features({"x1", "x1"}), {}, {}), GraphError);
    CHECK_THROWS_AS(Graph(features({"x1"}), {{"x1", "x1"}}, {}), GraphError);
    CHECK_THROWS_AS(Graph(features({"x1"}), {}, {{"x1", "x1"}}), GraphError);
    CHECK_THROWS_AS(Graph(features({""}), {}, {}), GraphError);
}

TEST_CASE("validate_graph") {
    CHECK(validate_graph(fixtures::toy(), Strictness::sink_outcome).empty());
    CHECK(validate_graph(fixtures::toy_latent(), Strictness::sink_outcome).empty());

    const Graph g = fixtures::toy();
    std::vector<std::pair<std::string, std::string>> dir, bi;
    for (auto [a, b] : g.directed()) dir.emplace_back(g.node(a).id, g.node(b).id);
    for (auto [a, b] : g.bidirected()) bi.emplace_back(g.node(a).id, g.node(b).id);
    dir.emplace_back("t", "x2");
    const Graph bad(g.nodes(), dir, bi);
    CHECK(validate_graph(bad, Strictness::structural).empty());  // still acyclic
    const auto strict = validate_graph(bad, Strictness::sink_outcome);
    CHECK(has_kind(strict, ViolationKind::treatment_non_outcome_child));

    const Graph cyc(features({"x1", "x2"}), {{"x1", "x2"}, {"x2", "x1"}, {"t", "y"}}, {});
    CHECK(has_kind(validate_graph(cyc), ViolationKind::cycle));
    CHECK_THROWS_AS(topological_order(cyc), GraphError);

    const Graph no_t(features({"x1"}, false), {}, {});
    CHECK(has_kind(validate_graph(no_t), ViolationKind::treatment_count));
    CHECK(has_kind(validate_graph(no_t), ViolationKind::outcome_count));

    auto nodes = features({"x1"});
    nodes.push_back({"h", Role::feature, false});
    const Graph hidden_bi(nodes, {{"t", "y"}}, {{"h", "x1"}});
    CHECK(has_kind(validate_graph(hidden_bi), ViolationKind::bidirected_unobserved));

    const Graph sink(features({"x1"}), {{"t", "y"}, {"y", "x1"}}, {});
    CHECK(validate_graph(sink).empty());
    CHECK(has_kind(validate_graph(sink, Strictness::sink_outcome), ViolationKind::outcome_has_child));
    CHECK(satisfies_sink_outcome(fixtures::m_bias()));
    CHECK(is_valid(fixtures::bi()));
}

TEST_CASE("latent_expansion") {
    const Graph toy = fixtures::toy();
    const Graph ex = latent_expansion(toy);
    CHECK(ex.bidirected().empty());
    CHECK(ex.size() == toy.size() + 4);
    int hidden = 0;
    for (const auto& n : ex.nodes()) hidden += !n.observed;
    CHECK(hidden == 4);

    const Graph plain(features({"a", "b"}), {{"a", "b"}, {"t", "y"}}, {});
    const Graph same = latent_expansion(plain);
    CHECK(same.size() == plain.size());
    CHECK(same.directed() == plain.directed());

    const Graph one(features({"a", "b"}), {{"t", "y"}}, {{"a", "b"}});
    const Graph h = latent_expansion(one);
    REQUIRE(h.size() == 5);
    const std::size_t u = h.index("u1");
    CHECK(h.has_directed(u, h.index("a")));
    CHECK(h.has_directed(u, h.index("b")));
    CHECK(h.parents(h.index("a")).size() == 1);

    // existing names are skipped
    const Graph taken(features({"u1", "w"}), {{"t", "y"}}, {{"u1", "w"}});
    CHECK(latent_expansion(taken).contains("u2"));
}

TEST_CASE("descendants") {
    const Graph g = fixtures::toy();
    CHECK(descendants(g, "x1") == NodeSet{"t", "x2", "y"});
    CHECK(descendants(g, "y").empty());
    const Graph chain(features({"a", "b", "c"}), {{"a", "b"}, {"b", "c"}, {"t", "y"}}, {});
    CHECK(descendants(chain, "a") == NodeSet{"b", "c"});
    CHECK_THROWS_AS(descendants(g, "nope"), GraphError);
    // bi-directed edges never make descendants
    CHECK(descendants(fixtures::m_bias(), "x1").empty());
}

TEST_CASE("d_separated examples") {
    const Graph g = fixtures::toy();
    CHECK_FALSE(d_separated(g, "x1", "y", {"x2"}));  // x1 -> t -> y
    CHECK(d_separated(g, "x1", "y", {"x2", "t"}));
    const Graph ge = attach_environment_node(g, "x1", {"t"});
    CHECK(d_separated(ge, "e", "y", {"x2", "t"}));
    CHECK_FALSE(d_separated(ge, "e", "y", {"t"}));

    const Graph col(features({"a", "b", "c"}), {{"a", "c"}, {"b", "c"}, {"t", "y"}}, {});
    CHECK(d_separated(col, "a", "b", {}));
    CHECK_FALSE(d_separated(col, "a", "b", {"c"}));

    CHECK_THROWS_AS(d_separated(g, "x1", "y", {"x1"}), GraphError);
    CHECK_THROWS_AS(d_separated(g, "x1", "q", {}), GraphError);
}

TEST_CASE("reachability agrees with path enumeration and is symmetric") {
    int checked = 0;
    for (Seed s = 0; s < 150; ++s) {
        const Graph g = testing::random_semi_markovian(6, 0.35, 0.2, s);
        std::vector<std::string> ids;
        for (const auto& n : g.nodes()) ids.push_back(n.id);
        for (std::size_t a = 0; a < ids.size(); ++a)
            for (std::size_t b = a + 1; b < ids.size(); ++b) {
                std::vector<std::string> rest;
                for (const auto& id : ids)
                    if (id != ids[a] && id != ids[b]) rest.push_back(id);
                for (const auto& z : testing::power_set(rest)) {
                    const bool fast = d_separated(g, ids[a], ids[b], z);
                    REQUIRE(fast == d_separated(g, ids[b], ids[a], z));
                    REQUIRE(fast == d_separated_by_paths(g, ids[a], ids[b], z));
                    ++checked;
                }
            }
    }
    CHECK(checked == 150 * 15 * 16);  // pairs times subsets of the other four
}

TEST_CASE("environment node never changes verdicts among old nodes") {
    for (Seed s = 0; s < 100; ++s) {
        const RandomGraphOptions o{5, std::nullopt, 0.4, true, false};
        const Graph g = random_sink_outcome_graph(o, s);
        const auto obs = g.observed_features();
        const Graph ge = attach_environment_node(g, obs.front(), {"t"});
        std::vector<std::string> ids;
        for (const auto& n : g.nodes()) ids.push_back(n.id);
        for (std::size_t a = 0; a < ids.size(); ++a)
            for (std::size_t b = a + 1; b < ids.size(); ++b) {
                std::vector<std::string> rest;
                for (const auto& id : ids)
                    if (id != ids[a] && id != ids[b]) rest.push_back(id);
                for (const auto& z : testing::power_set(rest))
                    REQUIRE(d_separated(g, ids[a], ids[b], z) == d_separated(ge, ids[a], ids[b], z));
            }
    }
}

TEST_CASE("g_minus_t") {
    const Graph g = fixtures::toy();
    const Graph m = g_minus_t(g);
    CHECK(m.directed().size() == g.directed().size() - 1);
    CHECK_FALSE(m.has_directed(m.index("t"), m.index("y")));
    CHECK(m.bidirected() == g.bidirected());
    CHECK_THROWS_AS(g_minus_t(m), GraphError);
}

TEST_CASE("satisfies_backdoor examples") {
    for (auto method : {BackdoorMethod::definition, BackdoorMethod::pruned_graph}) {
        const Graph toy = fixtures::toy();
        CHECK(satisfies_backdoor(toy, {"x2"}, method));
        CHECK_FALSE(satisfies_backdoor(toy, {}, method));
        CHECK_FALSE(satisfies_backdoor(toy, {"x3"}, method));
        CHECK_FALSE(satisfies_backdoor(toy, {"x2", "x3"}, method));

        const Graph m = fixtures::m_bias();
        CHECK(satisfies_backdoor(m, {}, method));
        CHECK_FALSE(satisfies_backdoor(m, {"x1"}, method));

        const Graph bd = fixtures::backdoor_demo();
        const std::set<NodeSet> expected{{"x3"},           {"x1", "x3"},       {"x2", "x3"},
                                         {"x1", "x2"},     {"x1", "x2", "x3"}, {"x1", "x2", "x4"},
                                         {"x1", "x2", "x3", "x4"}};
        for (const auto& z : testing::power_set(bd.observed_features()))
            CHECK(satisfies_backdoor(bd, z, method) == (expected.count(z) == 1));

        CHECK_THROWS_AS(satisfies_backdoor(toy, {"t"}, method), GraphError);
        CHECK_THROWS_AS(satisfies_backdoor(toy, {"y"}, method), GraphError);
    }
}

TEST_CASE("back-door routes agree on every fixture and every Z") {
    for (const auto& f : fixtures::all()) {
        const Graph g = f.build();
        if (!satisfies_sink_outcome(g)) continue;
        CAPTURE(f.file);
        CHECK(backdoor_route_disagreements(g).empty());
    }
}

TEST_CASE("back-door routes agree on all two-feature graphs") {
    // Every sink-outcome graph over x1, x2, t, y: 3 feature orientations,
    // 4 parent sets of t, 4 extra parent sets of y, 64 bi-directed patterns.
    const std::vector<std::pair<std::string, std::string>> pairs{{"x1", "x2"}, {"x1", "t"}, {"x1", "y"},
                                                                 {"x2", "t"},  {"x2", "y"}, {"t", "y"}};
    int graphs = 0;
    for (int orient = 0; orient < 3; ++orient)
        for (int tp = 0; tp < 4; ++tp)
            for (int yp = 0; yp < 4; ++yp)
                for (int bm = 0; bm < 64; ++bm) {
                    std::vector<std::pair<std::string, std::string>> dir{{"t", "y"}}, bi;
                    if (orient == 1) dir.emplace_back("x1", "x2");
                    if (orient == 2) dir.emplace_back("x2", "x1");
                    if (tp & 1) dir.emplace_back("x1", "t");
                    if (tp & 2) dir.emplace_back("x2", "t");
                    if (yp & 1) dir.emplace_back("x1", "y");
                    if (yp & 2) dir.emplace_back("x2", "y");
                    for (int k = 0; k < 6; ++k)
                        if (bm >> k & 1) bi.push_back(pairs[k]);
                    const Graph g(features({"x1", "x2"}), dir, bi);
                    REQUIRE(satisfies_sink_outcome(g));
                    REQUIRE(backdoor_route_disagreements(g).empty());
                    ++graphs;
                }
    CHECK(graphs == 3072);
}

TEST_CASE("back-door routes agree on random graphs") {
    for (Seed s = 0; s < 250; ++s) {
        RandomGraphOptions o;
        o.n_observed = 3 + static_cast<int>(s % 4);
        const Graph g = random_sink_outcome_graph(o, derive_seed(77, s));
        REQUIRE(satisfies_sink_outcome(g));
        REQUIRE(backdoor_route_disagreements(g).empty());
    }
}

TEST_CASE("attach_environment_node") {
    const Graph g = fixtures::toy();
    const Graph a = attach_environment_node(g, "x1", {"t"});
    const std::size_t e = a.index("e");
    CHECK(a.node(e).role == Role::environment);
    CHECK(a.children(e).empty());
    std::vector<std::string> pa;
    for (std::size_t p : a.parents(e)) pa.push_back(a.node(p).id);
    std::sort(pa.begin(), pa.end());
    CHECK(pa == std::vector<std::string>{"t", "x1"});
    CHECK(is_valid(a));

    const Graph b = attach_environment_node(g, "x3", {"t"});
    CHECK(b.parents(b.index("e")).size() == 2);

    const Graph c = attach_environment_node(g, "x1", {});
    REQUIRE(c.parents(c.index("e")).size() == 1);
    CHECK(c.node(c.parents(c.index("e"))[0]).id == "x1");

    CHECK_THROWS_AS(attach_environment_node(g, "x1", {"y"}), GraphError);
    CHECK_THROWS_AS(attach_environment_node(g, "x1", {"x1"}), GraphError);
    CHECK_THROWS_AS(attach_environment_node(a, "x1", {}), GraphError);
    CHECK_THROWS_AS(attach_environment_node(g, "t", {}), GraphError);
}

TEST_CASE("enumerate_paths returns well-formed simple paths") {
    const Graph g = fixtures::toy();
    const auto paths = enumerate_paths(g, "t", "y");
    CHECK_FALSE(paths.empty());
    for (const auto& p : paths) {
        REQUIRE(p.steps.size() + 1 == p.nodes.size());
        NodeSet seen(p.nodes.begin(), p.nodes.end());
        CHECK(seen.size() == p.nodes.size());
        for (std::size_t i = 0; i < p.steps.size(); ++i) {
            const std::size_t a = g.index(p.nodes[i]), b = g.index(p.nodes[i + 1]);
            switch (p.steps[i]) {
                case EdgeKind::forward: CHECK(g.has_directed(a, b)); break;
                case EdgeKind::backward: CHECK(g.has_directed(b, a)); break;
                case EdgeKind::bidirected: CHECK(g.has_bidirected(a, b)); break;
            }
        }
    }
}

}  // TEST_SUITE
