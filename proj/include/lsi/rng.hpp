#pragma once

#include <cstdint>

namespace lsi {

// Counter-based generator: every draw is a pure function of (seed, key...),
// so sampling is order-independent and parallelizes without coordination.
namespace rng {

inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t h = mix(seed);
    h = mix(h ^ a);
    h = mix(h ^ b);
    return h;
}

/// Uniform double in [0,1) keyed by (seed, a, b).
inline double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return static_cast<double>(hash(seed, a, b) >> 11) * 0x1.0p-53;
}

}  // namespace rng
}  // namespace lsi
