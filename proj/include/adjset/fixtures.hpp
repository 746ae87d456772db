#pragma once

#include <string_view>
#include <vector>

#include "adjset/graph.hpp"

namespace adjset::fixtures {

/// Toy graph with its four hidden confounders drawn explicitly (u1..u4).
Graph toy_latent();
/// Same toy graph with the confounders drawn as bi-directed edges.
Graph toy();
/// Toy graph with an extra anchor->outcome edge x1->y.
Graph toy_x1y();
/// Toy graph where x1 is a spouse of t only (no x1->t edge).
Graph bi();
/// M-bias: t->y, x1<->t, x1<->y.
Graph m_bias();
/// Four-feature graph with two treatment parents x1, x2.
Graph backdoor_demo();

/// Shipped file name -> builder, for the fixtures/ directory.
struct Named {
    std::string_view file;
    Graph (*build)();
};
const std::vector<Named>& all();

}  // namespace adjset::fixtures
