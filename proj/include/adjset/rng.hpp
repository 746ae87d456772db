#pragma once

#include <cstdint>
#include <random>

namespace adjset {

using Seed = std::uint64_t;
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent stream seed from a base seed and a stream index.
/// Used to give each (run, subset), chunk or row its own generator so that
/// parallel and serial execution draw identical numbers.
Seed derive_seed(Seed base, std::uint64_t stream);
Seed derive_seed(Seed base, std::uint64_t stream, std::uint64_t substream);

/// Counter-based uniform in [0, 1): a pure function of (seed, counter).
double counter_uniform(Seed seed, std::uint64_t counter);

}  // namespace adjset
