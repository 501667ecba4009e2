#pragma once

// Counter-based random numbers: every draw is a pure function of
// (seed, stream, counter), so a matrix entry or a sample can be regenerated
// without replaying the sequence before it.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sharplad::rng {

/// SplitMix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

/// Seed for the index-th independent job derived from a parent seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return hash(seed, 0x5eedULL, index);
}

/// Uniform in the open interval (0, 1).
inline double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return (static_cast<double>(hash(seed, stream, counter) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two consecutive uniforms.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const double u1 = uniform(seed, stream, 2 * counter);
    const double u2 = uniform(seed, stream, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential view over one (seed, stream) counter space.
class Stream {
public:
    explicit Stream(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    double uniform() { return rng::uniform(seed_, stream_, counter_++); }
    double normal() { return rng::normal(seed_, stream_, counter_++); }

    std::uint64_t below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(bound)) % bound;
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace sharplad::rng
