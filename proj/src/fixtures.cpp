#include "adjset/fixtures.hpp"

namespace adjset::fixtures {

namespace {

std::vector<Node> observed(std::initializer_list<const char*> features) {
    std::vector<Node> nodes;
    for (const char* id : features) nodes.push_back({id, Role::feature, true});
    nodes.push_back({"t", Role::treatment, true});
    nodes.push_back({"y", Role::outcome, true});
    return nodes;
}

}  // namespace

Graph toy_latent() {
    auto nodes = observed({"x1", "x2", "x3"});
    for (const char* u : {"u1", "u2", "u3", "u4"}) nodes.push_back({u, Role::feature, false});
    return Graph(nodes,
                 {{"x1", "x2"}, {"x1", "t"}, {"t", "y"}, {"x2", "y"},
                  {"u1", "t"}, {"u1", "x1"}, {"u2", "x1"}, {"u2", "x2"},
                  {"u3", "x2"}, {"u3", "x3"}, {"u4", "x3"}, {"u4", "y"}},
                 {});
}

Graph toy() {
    return Graph(observed({"x1", "x2", "x3"}),
                 {{"x1", "x2"}, {"x1", "t"}, {"t", "y"}, {"x2", "y"}},
                 {{"x1", "x2"}, {"t", "x1"}, {"x2", "x3"}, {"y", "x3"}});
}

Graph toy_x1y() {
    return Graph(observed({"x1", "x2", "x3"}),
                 {{"x1", "x2"}, {"x1", "t"}, {"x1", "y"}, {"t", "y"}, {"x2", "y"}},
                 {{"x1", "x2"}, {"t", "x1"}, {"x2", "x3"}, {"y", "x3"}});
}

Graph bi() {
    return Graph(observed({"x1", "x2", "x3"}),
                 {{"x1", "x2"}, {"t", "y"}, {"x2", "y"}},
                 {{"x1", "x2"}, {"t", "x1"}, {"x2", "x3"}, {"y", "x3"}});
}

Graph m_bias() {
    return Graph(observed({"x1"}), {{"t", "y"}}, {{"x1", "t"}, {"x1", "y"}});
}

Graph backdoor_demo() {
    return Graph(observed({"x1", "x2", "x3", "x4"}),
                 {{"x2", "x3"}, {"t", "y"}, {"x3", "y"}, {"x2", "t"}, {"x1", "t"}, {"x1", "x3"}},
                 {{"x2", "x3"}, {"x3", "x4"}, {"y", "x4"}});
}

const std::vector<Named>& all() {
    static const std::vector<Named> list{
        {"g_toy.json", &toy_latent},      {"g_toy_bidirected.json", &toy}, {"g_bi.json", &bi},
        {"g_m_bias.json", &m_bias},       {"g_bd.json", &backdoor_demo},   {"g_toy_x1y.json", &toy_x1y},
    };
    return list;
}

}  // namespace adjset::fixtures
