#pragma once

// FMCW waveform parameters and synthesis of dechirped baseband samples for
// each sensing beam. One chirp per beam; the stacked columns form the
// received sensing matrix Z.

#include <complex>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "risim/array.hpp"
#include "risim/json_util.hpp"
#include "risim/rng.hpp"
#include "risim/scene.hpp"

namespace risim {

constexpr double kSpeedOfLight = 299792458.0;

struct ChirpConfig {
    double f0{60e9};          // starting chirp frequency, Hz
    double bandwidth{1e9};    // Hz
    double t_active{10e-6};   // chirp duration, s
    double slope{1e14};       // Hz/s, = bandwidth / t_active
    double t_pri{10e-6};      // repetition interval, s
    int m_chirp{1};
    int m_sample{256};        // ADC samples per chirp
    double f_s{25.6e6};       // ADC rate, Hz
    double tx_power{1.0};     // E_s
    double noise_power{0.0};  // sigma_w^2

    // Defaults give indoor beat frequencies well below Nyquist: a 20 m total
    // path is a 6.7 MHz tone against f_s/2 = 12.8 MHz.
    static ChirpConfig defaults() { return {}; }

    void validate() const {
        if (!(f0 > 0) || !(bandwidth > 0) || !(t_active > 0) || !(f_s > 0))
            throw std::invalid_argument("ChirpConfig: frequencies and durations must be positive");
        if (m_sample < 1 || m_chirp < 1)
            throw std::invalid_argument("ChirpConfig: sample/chirp counts must be >= 1");
        if (std::abs(slope * t_active - bandwidth) > 1e-6 * bandwidth)
            throw std::invalid_argument("ChirpConfig: slope * t_active must equal bandwidth");
        if (m_sample / f_s > t_active * (1.0 + 1e-12))
            throw std::invalid_argument("ChirpConfig: ADC samples must fit within t_active");
        if (t_pri < t_active)
            throw std::invalid_argument("ChirpConfig: t_pri must be >= t_active");
        if (!(tx_power > 0) || noise_power < 0)
            throw std::invalid_argument("ChirpConfig: bad power values");
    }
};

// Dechirped samples of one chirp:
//   z[u] = sum_l sqrt(rho_l) e^{-j theta_l} e^{+j Xi_l(u)} + w[u] e^{j chi[u]}
// with Xi(u) = 2 pi (f0 xi + S t xi - S xi^2 / 2) at t = u / f_s,
// chi[u] = 2 pi f0 t + pi S t^2, rho = E_s |g b|^2, theta = Arg(g b), and
// w iid complex Gaussian(0, sigma_w^2) drawn from rng_seed.
inline Cvec beat_samples(const ChirpConfig& cfg, const PathSet& paths,
                         std::span<const std::complex<double>> beam_gains,
                         std::uint64_t rng_seed) {
    if (beam_gains.size() != paths.size())
        throw std::invalid_argument("beat_samples: one beam gain per path required");
    const double ts = 1.0 / cfg.f_s;
    struct Term {
        double amplitude;
        double base_cycles;  // f0 xi - S xi^2 / 2 - theta / 2pi
        double cycles_per_u; // S xi ts (the beat tone)
    };
    std::vector<Term> terms;
    terms.reserve(paths.size());
    for (std::size_t l = 0; l < paths.size(); ++l) {
        const double xi = paths[l].total_distance / kSpeedOfLight;
        const double beat = cfg.slope * xi;
        if (!(beat < cfg.f_s / 2.0))
            throw std::runtime_error(
                "beat_samples: path " + std::to_string(l) + " (total distance " +
                std::to_string(paths[l].total_distance) +
                " m) has beat frequency above Nyquist");
        const std::complex<double> g = paths[l].gain * beam_gains[l];
        const double amplitude = std::sqrt(cfg.tx_power) * std::abs(g);
        if (amplitude == 0.0) continue;
        const double theta = std::arg(g);
        terms.push_back({amplitude, cfg.f0 * xi - 0.5 * cfg.slope * xi * xi - theta / (2.0 * M_PI),
                         beat * ts});
    }

    Cvec z(static_cast<std::size_t>(cfg.m_sample), {0.0, 0.0});
    for (int u = 0; u < cfg.m_sample; ++u) {
        std::complex<double> acc{0, 0};
        for (const Term& t : terms) {
            const double cycles = std::fmod(t.base_cycles + t.cycles_per_u * u, 1.0);
            acc += std::polar(t.amplitude, 2.0 * M_PI * cycles);
        }
        z[static_cast<std::size_t>(u)] = acc;
    }
    if (cfg.noise_power > 0.0) {
        Rng rng(rng_seed);
        for (int u = 0; u < cfg.m_sample; ++u) {
            const double t = u * ts;
            const double chi_cycles = std::fmod(cfg.f0 * t + 0.5 * cfg.slope * t * t, 1.0);
            z[static_cast<std::size_t>(u)] += rng.next_cgaussian(cfg.noise_power) *
                                              std::polar(1.0, 2.0 * M_PI * chi_cycles);
        }
    }
    return z;
}

// M_sample x M_s matrix of dechirped returns, stored column-major (one
// contiguous column per sensing beam).
struct SensingCube {
    int m_sample{0};
    int m_s{0};
    Cvec data;

    std::span<const std::complex<double>> column(int m) const {
        return {data.data() + static_cast<std::size_t>(m) * m_sample,
                static_cast<std::size_t>(m_sample)};
    }
    std::span<std::complex<double>> column(int m) {
        return {data.data() + static_cast<std::size_t>(m) * m_sample,
                static_cast<std::size_t>(m_sample)};
    }
};

// Everything the sweep needs besides the scene: aperture, feed position in
// the aperture frame, and one sensing beam per grid direction.
struct SensingSetup {
    UpaGeometry geom;
    Vec3 feed_local;
    SensingGrid grid;
    std::vector<InteractionVector> beams;
};

inline SensingSetup build_sensing_setup(const UpaGeometry& geom, const Scene& scene,
                                        const SensingGrid& grid) {
    SensingSetup setup;
    setup.geom = geom;
    setup.feed_local =
        scene.ris_orientation.to_local(scene.feed_position - scene.ris_center);
    setup.grid = grid;
    setup.beams.reserve(static_cast<std::size_t>(grid.size()));
    for (const Direction& d : grid.directions)
        setup.beams.push_back(sensing_beam(geom, setup.feed_local, d));
    return setup;
}

// Full codebook sweep: one chirp per beam. Each path picks up the beam's
// response at its own angles twice (TX and RX passage through the RIS).
// Column m draws its noise from substream (seed, m), so results are identical
// for any thread count.
inline SensingCube sweep(const ChirpConfig& cfg, const Scene& scene,
                         const PathConfig& pcfg, const SensingSetup& setup,
                         std::uint64_t seed, int n_threads = 1) {
    cfg.validate();
    if (static_cast<int>(setup.beams.size()) != setup.grid.size())
        throw std::invalid_argument("sweep: beam count must match grid size");
    SensingCube cube;
    cube.m_sample = cfg.m_sample;
    cube.m_s = setup.grid.size();
    cube.data.assign(static_cast<std::size_t>(cube.m_sample) * cube.m_s, {0.0, 0.0});

    auto run_columns = [&](int begin, int end) {
        std::vector<std::complex<double>> gains;
        for (int m = begin; m < end; ++m) {
            const PathSet paths =
                backscatter_paths(scene, pcfg, setup.grid.directions[static_cast<std::size_t>(m)]);
            gains.clear();
            for (const Path& p : paths) {
                const std::complex<double> g = beam_response(
                    setup.geom, setup.feed_local, setup.beams[static_cast<std::size_t>(m)],
                    {p.azimuth, p.zenith});
                gains.push_back(g * g);
            }
            const Cvec z = beat_samples(cfg, paths, gains,
                                        Rng::derive_seed(seed, static_cast<std::uint64_t>(m)));
            std::copy(z.begin(), z.end(), cube.column(m).begin());
        }
    };

    if (n_threads <= 1 || cube.m_s < 2) {
        run_columns(0, cube.m_s);
    } else {
        const int workers = std::min(n_threads, cube.m_s);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            const int begin = static_cast<int>(static_cast<long long>(cube.m_s) * w / workers);
            const int end = static_cast<int>(static_cast<long long>(cube.m_s) * (w + 1) / workers);
            pool.emplace_back(run_columns, begin, end);
        }
        for (auto& t : pool) t.join();
    }
    return cube;
}

// ---- cube file I/O ----------------------------------------------------------
// Flat binary of little-endian float64 interleaved re/im in row-major order
// (sample index u outer, beam index m inner), plus a JSON sidecar with the
// dimensions and the chirp configuration.

inline nlohmann::json chirp_to_json(const ChirpConfig& c) {
    return {{"f0", c.f0},           {"bandwidth", c.bandwidth}, {"t_active", c.t_active},
            {"slope", c.slope},     {"t_pri", c.t_pri},         {"m_chirp", c.m_chirp},
            {"m_sample", c.m_sample}, {"f_s", c.f_s},           {"tx_power", c.tx_power},
            {"noise_power", c.noise_power}};
}

inline ChirpConfig chirp_from_json(const nlohmann::json& j, const std::string& context) {
    ChirpConfig c;
    c.f0 = jsonu::get<double>(j, "f0", context);
    c.bandwidth = jsonu::get<double>(j, "bandwidth", context);
    c.t_active = jsonu::get<double>(j, "t_active", context);
    c.slope = jsonu::get_or<double>(j, "slope", c.bandwidth / c.t_active);
    c.t_pri = jsonu::get_or<double>(j, "t_pri", c.t_active);
    c.m_chirp = jsonu::get_or<int>(j, "m_chirp", 1);
    c.m_sample = jsonu::get<int>(j, "m_sample", context);
    c.f_s = jsonu::get<double>(j, "f_s", context);
    c.tx_power = jsonu::get_or<double>(j, "tx_power", 1.0);
    c.noise_power = jsonu::get_or<double>(j, "noise_power", 0.0);
    c.validate();
    return c;
}

inline void save_cube(const SensingCube& cube, const ChirpConfig& cfg,
                      const std::string& bin_path, const std::string& sidecar_path) {
    std::ofstream out(bin_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + bin_path);
    for (int u = 0; u < cube.m_sample; ++u)
        for (int m = 0; m < cube.m_s; ++m) {
            const std::complex<double>& v =
                cube.data[static_cast<std::size_t>(m) * cube.m_sample + u];
            const double re = v.real(), im = v.imag();
            out.write(reinterpret_cast<const char*>(&re), sizeof(double));
            out.write(reinterpret_cast<const char*>(&im), sizeof(double));
        }
    nlohmann::json side{{"m_sample", cube.m_sample}, {"m_s", cube.m_s},
                        {"chirp", chirp_to_json(cfg)}};
    std::ofstream sout(sidecar_path);
    if (!sout) throw std::runtime_error("cannot open for writing: " + sidecar_path);
    sout << side.dump(2) << '\n';
}

inline std::pair<SensingCube, ChirpConfig> load_cube(const std::string& bin_path,
                                                     const std::string& sidecar_path) {
    std::ifstream sin(sidecar_path);
    if (!sin) throw std::runtime_error("cannot open cube sidecar: " + sidecar_path);
    nlohmann::json side;
    sin >> side;
    SensingCube cube;
    cube.m_sample = jsonu::get<int>(side, "m_sample", "sidecar");
    cube.m_s = jsonu::get<int>(side, "m_s", "sidecar");
    const ChirpConfig cfg = chirp_from_json(jsonu::require(side, "chirp", "sidecar"), "sidecar.chirp");
    cube.data.assign(static_cast<std::size_t>(cube.m_sample) * cube.m_s, {0.0, 0.0});
    std::ifstream in(bin_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open cube file: " + bin_path);
    for (int u = 0; u < cube.m_sample; ++u)
        for (int m = 0; m < cube.m_s; ++m) {
            double re = 0, im = 0;
            in.read(reinterpret_cast<char*>(&re), sizeof(double));
            in.read(reinterpret_cast<char*>(&im), sizeof(double));
            if (!in) throw std::runtime_error("cube file truncated: " + bin_path);
            cube.data[static_cast<std::size_t>(m) * cube.m_sample + u] = {re, im};
        }
    return {std::move(cube), cfg};
}

} // namespace risim
