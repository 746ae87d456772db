#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace adjset {

struct SizeRange {
    int min_size = 0;
    std::optional<int> max_size;  // unbounded when empty
};

/// Subsets of {0..m-1} ordered by size, then lexicographically.
std::vector<std::vector<int>> enumerate_subsets(int m, SizeRange range = {});

/// Number of subsets enumerate_subsets(m, range) returns.
std::uint64_t count_subsets(int m, SizeRange range = {});

std::uint64_t binomial(int n, int k);

}  // namespace adjset
