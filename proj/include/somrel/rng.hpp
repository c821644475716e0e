#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace somrel {

// SplitMix64 finalizer. Good avalanche, cheap, and stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Seed for stream `stream` of a master seed. Pure function: every component
// that needs randomness derives its own stream instead of sharing generator
// state, so results do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) + stream);
}

// Unbiased integer in [0, n). Uses rejection sampling on the raw 64-bit
// output, which the standard pins down exactly for mt19937_64 (unlike
// std::uniform_int_distribution, whose sequence is implementation-defined).
inline std::uint64_t uniform_index(std::mt19937_64& gen, std::uint64_t n) {
    assert(n >= 1);
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t rem = (max % n + 1) % n;  // 2^64 mod n
    const std::uint64_t limit = max - rem;
    std::uint64_t x;
    do {
        x = gen();
    } while (x > limit);
    return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Standard normal deviate via Box-Muller. One value per call; the sine
// half of the pair is discarded to keep the call stateless.
inline double normal_deviate(std::mt19937_64& gen) {
    const double u1 = 1.0 - uniform_unit(gen);  // (0, 1]
    const double u2 = uniform_unit(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692 * u2);
}

}  // namespace somrel
