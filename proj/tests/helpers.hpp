#pragma once

#include <string>
#include <vector>

#include "adjset/graph.hpp"
#include "adjset/rng.hpp"

namespace testing {

inline std::vector<adjset::Node> features(std::initializer_list<const char*> ids, bool with_ty = true) {
    std::vector<adjset::Node> nodes;
    for (const char* id : ids) nodes.push_back({id, adjset::Role::feature, true});
    if (with_ty) {
        nodes.push_back({"t", adjset::Role::treatment, true});
        nodes.push_back({"y", adjset::Role::outcome, true});
    }
    return nodes;
}

/// Arbitrary semi-Markovian DAG over v0..v(n-1): directed edges respect the
/// index order, bi-directed pairs are independent coin flips.
inline adjset::Graph random_semi_markovian(int n, double p_dir, double p_bi, adjset::Seed seed) {
    adjset::Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<adjset::Node> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back({"v" + std::to_string(i), adjset::Role::feature, true});
    nodes[n - 2].role = adjset::Role::treatment;
    nodes[n - 1].role = adjset::Role::outcome;
    std::vector<std::pair<std::string, std::string>> dir, bi;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (u(rng) < p_dir) dir.emplace_back(nodes[i].id, nodes[j].id);
            if (u(rng) < p_bi) bi.emplace_back(nodes[i].id, nodes[j].id);
        }
    return adjset::Graph(nodes, dir, bi);
}

inline std::vector<adjset::NodeSet> power_set(const std::vector<std::string>& items) {
    std::vector<adjset::NodeSet> out;
    for (unsigned mask = 0; mask < (1u << items.size()); ++mask) {
        adjset::NodeSet z;
        for (std::size_t i = 0; i < items.size(); ++i)
            if (mask >> i & 1u) z.insert(items[i]);
        out.push_back(z);
    }
    return out;
}

}  // namespace testing
