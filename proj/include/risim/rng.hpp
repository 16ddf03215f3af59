#pragma once

// Deterministic random number generation. All randomness in the simulator
// flows from a single seed through named substreams, so results do not depend
// on scheduling order or on the platform's <random> distributions.

#include <cmath>
#include <complex>
#include <cstdint>

namespace risim {

namespace detail {

// splitmix64 finalizer (Steele, Lea, Flood 2014)
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(detail::mix64(seed)) {}

    // Seed of the independent stream (seed, stream_id). Used to give each
    // sensing-sweep column and each experiment sample its own noise sequence.
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
        return seed ^ detail::mix64(stream_id + 0x632be59bd9b4e019ULL);
    }

    static Rng substream(std::uint64_t seed, std::uint64_t stream_id) {
        return Rng(derive_seed(seed, stream_id));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1]; never returns 0 so log() below is safe.
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (cosine branch).
    double next_gaussian() {
        const double u1 = next_unit();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Circularly-symmetric complex Gaussian with E|w|^2 = variance.
    std::complex<double> next_cgaussian(double variance) {
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-std::log(u1) * variance);
        return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
    }

private:
    std::uint64_t state_;
};

} // namespace risim
