#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace eqbase {

/// Engine used everywhere a stream of random numbers is needed.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Stable across platforms and releases.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derive a child seed from a parent seed and a path of indices, e.g.
/// derive_seed(master, {cell, sim}). Distinct paths give unrelated streams.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = splitmix64(seed);
    for (auto p : path) h = splitmix64(h ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
    return h;
}

/// Uniform draw on the open interval (0, 1) with 53 random bits.
inline double uniform_open(Rng& rng) {
    // (k + 0.5) / 2^53 never hits 0 or 1
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace eqbase
