#include "adjset/subsets.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace adjset {

namespace {

int upper(int m, const SizeRange& range) {
    if (m < 0) throw std::invalid_argument("subset universe size must be non-negative");
    if (range.min_size < 0) throw std::invalid_argument("minimum subset size must be non-negative");
    return std::min(m, range.max_size.value_or(m));
}

}  // namespace

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;  // r * (n - k + i) can exceed 64 bits before the division
    for (int i = 1; i <= k; ++i) r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    return static_cast<std::uint64_t>(r);
}

std::uint64_t count_subsets(int m, SizeRange range) {
    std::uint64_t total = 0;
    for (int s = range.min_size; s <= upper(m, range); ++s) total += binomial(m, s);
    return total;
}

std::vector<std::vector<int>> enumerate_subsets(int m, SizeRange range) {
    const int top = upper(m, range);
    if (m > 30 && !range.max_size) throw std::invalid_argument("refusing to enumerate all subsets of more than 30 items");
    std::vector<std::vector<int>> out;
    out.reserve(static_cast<std::size_t>(count_subsets(m, range)));
    for (int s = range.min_size; s <= top; ++s) {
        std::vector<int> c(static_cast<std::size_t>(s));
        std::iota(c.begin(), c.end(), 0);
        while (true) {
            out.push_back(c);
            int i = s - 1;
            while (i >= 0 && c[static_cast<std::size_t>(i)] == m - s + i) --i;
            if (i < 0) break;
            ++c[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < s; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

}  // namespace adjset
