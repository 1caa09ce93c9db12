#pragma once

#include <cstdint>
#include <random>

namespace parley {

using Rng = std::mt19937_64;

/// Unbiased draw from [0, n). Unlike std::uniform_int_distribution the
/// sequence is identical across standard library implementations.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n)
{
    const std::uint64_t limit = Rng::max() - (Rng::max() % n + 1) % n;
    std::uint64_t x = rng();
    while (x > limit) x = rng();
    return x % n;
}

/// splitmix64 step, for deriving independent seeds from one user seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace parley
