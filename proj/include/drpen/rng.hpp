#pragma once

#include <cstdint>
#include <random>

namespace drpen {

// splitmix64 step; used to derive well-separated seeds from small integers.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic stream seed from a base seed and up to three indices.
// Each replication / resample / fold gets its own independent stream so
// results do not depend on execution order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(base ^ 0x5851f42d4c957f2dULL);
    s = splitmix64(s ^ splitmix64(a));
    s = splitmix64(s ^ splitmix64(b));
    s = splitmix64(s ^ splitmix64(c));
    return s;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace drpen
