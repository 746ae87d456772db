#include "adjset/rng.hpp"

namespace adjset {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Seed derive_seed(Seed base, std::uint64_t stream) {
    return splitmix64(splitmix64(base) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

Seed derive_seed(Seed base, std::uint64_t stream, std::uint64_t substream) {
    return derive_seed(derive_seed(base, stream), substream);
}

double counter_uniform(Seed seed, std::uint64_t counter) {
    const std::uint64_t bits = derive_seed(seed, counter);
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace adjset
