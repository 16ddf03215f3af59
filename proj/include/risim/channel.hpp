#pragma once

// Communication channel vectors built from path sets, and the received
// signal / SNR model for a single-antenna AP and UE behind the RIS.

#include <complex>
#include <stdexcept>

#include "risim/array.hpp"
#include "risim/rng.hpp"
#include "risim/scene.hpp"

namespace risim {

using ChannelVector = Cvec;

struct CommConfig {
    double symbol_power{1.0}; // E_c
    double noise_power{1.0};  // sigma_w^2

    void validate() const {
        if (!(symbol_power > 0) || !(noise_power > 0))
            throw std::invalid_argument("CommConfig: powers must be positive");
    }
};

// h = sum_l gain_l * a(az_l, ze_l); an empty path set gives the zero vector.
inline ChannelVector channel_from_paths(const UpaGeometry& geom, const PathSet& paths) {
    geom.validate();
    ChannelVector h(static_cast<std::size_t>(geom.size()), {0.0, 0.0});
    for (const Path& p : paths) {
        const Cvec a = array_response(geom, p.azimuth, p.zenith);
        for (std::size_t n = 0; n < h.size(); ++n) h[n] += p.gain * a[n];
    }
    return h;
}

// Elementwise (Hadamard) product of the two RIS-side channels.
inline ChannelVector composite_channel(const ChannelVector& h_t, const ChannelVector& h_r) {
    if (h_t.size() != h_r.size())
        throw std::invalid_argument("composite_channel: length mismatch");
    ChannelVector h(h_t.size());
    for (std::size_t n = 0; n < h.size(); ++n) h[n] = h_r[n] * h_t[n];
    return h;
}

inline std::complex<double> beamformed_sum(const ChannelVector& h,
                                           const InteractionVector& psi) {
    if (h.size() != psi.size())
        throw std::invalid_argument("beamformed_sum: length mismatch");
    std::complex<double> acc{0, 0};
    for (std::size_t n = 0; n < h.size(); ++n) acc += h[n] * psi[n];
    return acc;
}

// Linear received SNR = (E_c / sigma_w^2) |(h_r o h_t)^T psi|^2.
inline double received_snr(const ChannelVector& h_t, const ChannelVector& h_r,
                           const InteractionVector& psi, const CommConfig& cfg) {
    const std::complex<double> s = beamformed_sum(composite_channel(h_t, h_r), psi);
    return cfg.symbol_power / cfg.noise_power * std::norm(s);
}

// Phase-only vector exp(-j Arg(h_n)): the unit-modulus optimum.
inline InteractionVector equal_gain_vector(const ChannelVector& h) {
    InteractionVector psi(h.size());
    for (std::size_t n = 0; n < h.size(); ++n) psi[n] = std::polar(1.0, -std::arg(h[n]));
    return psi;
}

// sum_n |h_n|, the amplitude achieved by equal_gain_vector.
inline double equal_gain_bound(const ChannelVector& h) {
    double acc = 0;
    for (const auto& v : h) acc += std::abs(v);
    return acc;
}

// One received symbol y = (h_r o h_t)^T psi x + w. Mostly for end-to-end
// demos; SNR is the primary metric.
inline std::complex<double> received_symbol(const ChannelVector& h_t,
                                            const ChannelVector& h_r,
                                            const InteractionVector& psi,
                                            std::complex<double> x,
                                            const CommConfig& cfg, Rng& rng) {
    const std::complex<double> s = beamformed_sum(composite_channel(h_t, h_r), psi);
    return s * x + rng.next_cgaussian(cfg.noise_power);
}

} // namespace risim
