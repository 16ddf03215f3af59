// Acceptance suite: one pass/fail line per criterion. Exit status is the
// number of failed criteria, so ctest reports failure if any regresses.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dbscan_reference.hpp"
#include "risim/harness.hpp"

using namespace risim;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.empty() ? "" : " | ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string data_path(const std::string& name) {
    return std::string(RISIM_DATA_DIR) + "/" + name;
}

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("risim_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Facet big_wall_x(double c, double reflectivity) {
    Facet f;
    f.vertices = {Vec3{c, -40, -40}, Vec3{c, 40, -40}, Vec3{c, 40, 40}, Vec3{c, -40, 40}};
    f.reflectivity = reflectivity;
    return f;
}

Direction direction_from_cosines(double cy, double cz) {
    const double ux = std::sqrt(1.0 - cy * cy - cz * cz);
    return direction_from_unit(Vec3{ux, cy, cz});
}

// ---- 1: range recovery ------------------------------------------------------

void criterion_range_recovery() {
    Scene s;
    s.facets = {big_wall_x(4.0, 0.5)};
    s.ap_position = {1, 1, 0};
    s.ris_center = {0, 0, 0};
    s.feed_position = {0.2, 0, 0};
    s.max_depth = 10.0;

    ExperimentConfig cfg;
    cfg.scene = s;
    cfg.geom = UpaGeometry::half_wavelength(16, 16, 0.004996540966666667);
    cfg.chirp = ChirpConfig::defaults(); // noise-free
    cfg.grid_m_h = 64;
    cfg.grid_m_v = 64;
    cfg.fov = {-M_PI / 4, M_PI / 4, M_PI / 2 - 0.6, M_PI / 2 + 0.6};
    cfg.path_cfg.wavelength = cfg.geom.wavelength;

    const auto t0 = std::chrono::steady_clock::now();
    const DepthMap depth = run_background(cfg);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const SensingGrid grid = cfg.grid();
    const double bin =
        kSpeedOfLight / (2.0 * cfg.chirp.bandwidth * cfg.imaging.pad_factor);
    int hit = 0, good = 0;
    for (int m = 0; m < grid.size(); ++m) {
        const Vec3 u = unit_from_direction(grid.directions[static_cast<std::size_t>(m)]);
        if (u.x <= 0) continue;
        const double expected = 4.0 / u.x; // analytic one-way ray distance
        if (expected > s.max_depth) continue;
        ++hit;
        if (std::abs(depth.values[static_cast<std::size_t>(m)] - expected) <= bin) ++good;
    }
    const double frac = hit ? static_cast<double>(good) / hit : 0.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "%d/%d pixels within %.4f m (%.2f%%), 64x64 sweep+map in %.1f s", good,
                  hit, bin, 100.0 * frac, seconds);
    report(1, "range recovery on a noise-free wall", frac >= 0.99 && seconds < 30.0, buf);
}

// ---- 2: equal-gain optimality -------------------------------------------------

void criterion_equal_gain() {
    const CommConfig comm{1.0, 1.0};
    Rng rng(2024);
    const std::size_t n = 64;
    const ChannelVector ones(n, {1.0, 0.0});
    bool ok = true;
    double worst_margin = 1e300;
    for (int c = 0; c < 1000 && ok; ++c) {
        ChannelVector h(n);
        for (auto& v : h) v = {rng.next_gaussian(), rng.next_gaussian()};
        const double snr_eg = received_snr(h, ones, equal_gain_vector(h), comm);
        for (int t = 0; t < 100; ++t) {
            InteractionVector psi(n);
            for (auto& v : psi) v = std::polar(1.0, (rng.next_unit() - 0.5) * 2 * M_PI);
            const double snr = received_snr(h, ones, psi, comm);
            worst_margin = std::min(worst_margin, (snr_eg - snr) / snr_eg);
            if (snr > snr_eg * (1.0 + 1e-9)) {
                ok = false;
                break;
            }
        }
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "1000 channels x 100 psi, smallest relative margin %.3e", worst_margin);
    report(2, "equal-gain beamforming is never beaten", ok, buf);
}

// ---- 3: exhaustive-search equivalence ------------------------------------------

void criterion_exhaustive_equivalence() {
    const UpaGeometry geom = UpaGeometry::half_wavelength(8, 8, 0.005);
    const Codebook cb = beamsteering_codebook(geom, 2, 2); // 16 x 16 beams, even grid
    Rng rng(333);
    auto pick_cosine = [&]() {
        // visible grid cosines, away from the disk edge
        while (true) {
            const int i = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(cb.m_az));
            const double c = -1.0 + 2.0 * i / cb.m_az;
            if (std::abs(c) <= 0.625) return c;
        }
    };
    int matches = 0;
    const int placements = 64;
    for (int p = 0; p < placements; ++p) {
        const Direction theta_ap = direction_from_cosines(pick_cosine(), pick_cosine());
        const Direction theta_ue = direction_from_cosines(pick_cosine(), pick_cosine());

        ChannelVector h_t = array_response(geom, theta_ap);
        ChannelVector h_r = array_response(geom, theta_ue);
        const std::complex<double> a_t = std::polar(0.2 + rng.next_unit(), rng.next_unit() * 6.28);
        const std::complex<double> a_r = std::polar(0.2 + rng.next_unit(), rng.next_unit() * 6.28);
        for (auto& v : h_t) v *= a_t;
        for (auto& v : h_r) v *= a_r;

        const InteractionVector psi = design_interaction_vector(geom, theta_ap, theta_ue);
        const BeamRanking ranking = rank_beams(psi, cb);
        const SearchResult ex = exhaustive_search(h_t, h_r, cb);
        if (ranking.entries.front().first == ex.index) ++matches;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d/%d on-grid placements matched exactly", matches,
                  placements);
    report(3, "similarity top-1 equals exhaustive search", matches == placements, buf);
}

// ---- 4: DBSCAN oracle -----------------------------------------------------------

void criterion_dbscan_oracle() {
    Rng rng(4444);
    int matched = 0;
    const int sets = 200;
    for (int t = 0; t < sets; ++t) {
        const int n = 1 + static_cast<int>(rng.next_u64() % 500);
        std::vector<Pixel> pts;
        pts.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            pts.emplace_back(static_cast<int>(rng.next_u64() % 64),
                             static_cast<int>(rng.next_u64() % 64));
        const double eps = 1.0 + rng.next_unit() * 3.0;
        const int min_pts = 1 + static_cast<int>(rng.next_u64() % 8);
        if (dbscan(pts, eps, min_pts).labels == testutil::dbscan_reference(pts, eps, min_pts))
            ++matched;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d/%d randomized point sets labeled identically",
                  matched, sets);
    report(4, "DBSCAN matches the O(n^2) reference", matched == sets, buf);
}

// ---- 5: overhead with the full-size codebook -------------------------------------

void criterion_overhead() {
    const UpaGeometry geom = UpaGeometry::half_wavelength(40, 40, 0.004996540966666667);
    const Codebook cb = beamsteering_codebook(geom, 4, 4);

    const Direction theta_ap = direction_from_cosines(-0.31, 0.12);
    const Direction theta_ue = direction_from_cosines(0.47, -0.08);
    const ChannelVector h_t = array_response(geom, theta_ap);
    const ChannelVector h_r = array_response(geom, theta_ue);
    const InteractionVector psi = design_interaction_vector(geom, theta_ap, theta_ue);
    const BeamRanking ranking = rank_beams(psi, cb);
    const GainReport rep = evaluate_topk(h_t, h_r, ranking, cb, {25});

    const bool pass = cb.size() == 25600 &&
                      rep.entries[0].overhead_ratio == 25.0 / 25600.0 &&
                      rep.entries[0].overhead_ratio < 0.001;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "codebook %d beams, top-25 overhead %.6f (top-25 %.2f dB)",
                  cb.size(), rep.entries[0].overhead_ratio, rep.entries[0].gain_db);
    report(5, "top-25 of 25600 beams is under 0.1% overhead", pass, buf);
}

// ---- 6/7/8: desk-scale experiment criteria ---------------------------------------

std::vector<SampleOutcome> run_all_samples(const ExperimentConfig& cfg, const DepthMap& bg) {
    std::vector<SampleOutcome> outcomes;
    for (std::size_t li = 0; li < cfg.locations.size(); ++li)
        for (std::size_t oi = 0; oi < cfg.antenna_offsets.size(); ++oi)
            outcomes.push_back(
                run_sample(cfg, bg, static_cast<int>(li), static_cast<int>(oi)));
    return outcomes;
}

std::size_t index_of_k(const std::vector<int>& k_list, int k) {
    for (std::size_t i = 0; i < k_list.size(); ++i)
        if (k_list[i] == k) return i;
    throw std::logic_error("k not configured");
}

void criterion_oversampling_gain() {
    ExperimentConfig cfg = ExperimentConfig::from_file(data_path("desk_experiment.json"));
    cfg.chirp.noise_power = 0.0; // paired runs differ only in the codebook
    const DepthMap bg = run_background(cfg);
    const std::vector<SampleOutcome> outcomes = run_all_samples(cfg, bg);

    const ExperimentResult osf4 = evaluate_samples(cfg, outcomes, cfg.comm_codebook());
    ExperimentConfig cfg1 = cfg;
    cfg1.osf_az = 1;
    cfg1.osf_ze = 1;
    const ExperimentResult osf1 = evaluate_samples(cfg1, outcomes, cfg1.comm_codebook());

    const std::size_t k25 = index_of_k(cfg.k_list, 25);
    const double gap = osf4.mean_topk_db[k25] - osf1.mean_topk_db[k25];
    char buf[176];
    std::snprintf(buf, sizeof(buf),
                  "top-25 mean gain OSF-4 %.2f dB vs OSF-1 %.2f dB (gap %.2f dB, %d/%zu detected)",
                  osf4.mean_topk_db[k25], osf1.mean_topk_db[k25], gap, osf4.detected_count,
                  outcomes.size());
    report(6, "OSF-4 codebook beats OSF-1 by at least 1.5 dB", gap >= 1.5, buf);
}

void criterion_near_optimality() {
    ExperimentConfig cfg = ExperimentConfig::from_file(data_path("desk_experiment.json"));
    // noise floor for a >= 20 dB sensing SNR at the farthest user placement
    double d_max = 0.0;
    for (const Vec3& loc : cfg.locations)
        for (const Vec3& off : cfg.antenna_offsets)
            d_max = std::max(d_max, (loc + off - cfg.scene.ris_center).norm());
    const double d_feed = cfg.scene.feed_distance();
    const double refl = cfg.scene.user->body_reflectivity;
    const double gain_min = std::sqrt(refl) * cfg.path_cfg.a_ref / std::pow(d_feed * d_max, 2);
    const double rho_min = cfg.chirp.tx_power * gain_min * gain_min;
    cfg.chirp.noise_power = rho_min / 100.0; // exactly 20 dB at the worst placement

    const DepthMap bg = run_background(cfg);
    const ExperimentResult result = run_experiment(cfg, bg);
    const std::size_t k25 = index_of_k(cfg.k_list, 25);
    const double shortfall = result.mean_exhaustive_db - result.mean_topk_db[k25];
    const bool pass = result.detection_rate() >= 0.80 && shortfall <= 1.0;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "sensing SNR >= 20 dB, detection %d/%zu (%.0f%%), top-25 %.2f dB vs "
                  "exhaustive %.2f dB (gap %.2f dB)",
                  result.detected_count, result.records.size(),
                  100.0 * result.detection_rate(), result.mean_topk_db[k25],
                  result.mean_exhaustive_db, shortfall);
    report(7, "top-25 within 1 dB of exhaustive at 80%+ detection", pass, buf);
}

void criterion_determinism() {
    const ExperimentConfig cfg = ExperimentConfig::from_file(data_path("desk_experiment.json"));
    const auto dir = scratch_dir("determinism");
    const std::vector<std::string> names{"background.csv", "background.pgm", "records.csv",
                                         "topk_gains.csv", "detections.json"};
    for (int run = 0; run < 2; ++run) {
        const fs::path out = dir / ("run" + std::to_string(run));
        fs::create_directories(out);
        const DepthMap bg = run_background(cfg);
        write_depth_csv(bg, (out / "background.csv").string());
        write_depth_pgm(bg, cfg.scene.max_depth, (out / "background.pgm").string());
        const ExperimentResult result = run_experiment(cfg, bg);
        write_records_csv(result, (out / "records.csv").string());
        write_aggregate_csv(result, (out / "topk_gains.csv").string());
        write_detections_json(result, (out / "detections.json").string());
    }
    int identical = 0;
    for (const std::string& name : names) {
        const std::string a = slurp((dir / "run0" / name).string());
        if (!a.empty() && a == slurp((dir / "run1" / name).string())) ++identical;
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d/%zu output files byte-identical across reruns",
                  identical, names.size());
    report(8, "identical config and seed reproduce outputs exactly",
           identical == static_cast<int>(names.size()), buf);
}

// ---- 9: background subtraction with injected clutter ------------------------------

void criterion_background_subtraction() {
    const ChirpConfig chirp = ChirpConfig::defaults(); // noise-free
    const double feed = 0.2;
    const SensingGrid grid = sensing_grid(8, 8, {-0.4, 0.4, M_PI / 2 - 0.4, M_PI / 2 + 0.4});
    const std::vector<std::complex<double>> one{{1.0, 0.0}};
    const std::vector<std::complex<double>> two{{1.0, 0.0}, {1.0, 0.0}};

    auto wall_path = [&](double depth, double amplitude) {
        Path p;
        p.total_distance = 2.0 * (feed + depth);
        p.gain = std::polar(amplitude, -0.7);
        p.azimuth = 0;
        p.zenith = M_PI / 2;
        return p;
    };
    auto in_block = [](int m, int x0, int y0) {
        const int x = m % 8, y = m / 8;
        return x >= x0 && x < x0 + 3 && y >= y0 && y < y0 + 3;
    };

    SensingCube bg_cube, cur_cube;
    bg_cube.m_sample = cur_cube.m_sample = chirp.m_sample;
    bg_cube.m_s = cur_cube.m_s = grid.size();
    for (int m = 0; m < grid.size(); ++m) {
        const double depth = 3.0 + 0.02 * m;
        const Cvec base = beat_samples(chirp, {wall_path(depth, 1.0)}, one, 1);
        bg_cube.data.insert(bg_cube.data.end(), base.begin(), base.end());
        if (in_block(m, 2, 2)) {
            // user block: closer return replaces the background
            const Cvec user = beat_samples(chirp, {wall_path(depth - 1.5, 1.0)}, one, 1);
            cur_cube.data.insert(cur_cube.data.end(), user.begin(), user.end());
        } else if (in_block(m, 5, 5)) {
            // clutter block: direct return plus a 10x-amplitude longer path
            const Cvec clut = beat_samples(
                chirp, {wall_path(depth, 1.0), wall_path(depth + 2.0, 10.0)}, two, 1);
            cur_cube.data.insert(cur_cube.data.end(), clut.begin(), clut.end());
        } else {
            cur_cube.data.insert(cur_cube.data.end(), base.begin(), base.end());
        }
    }

    const DepthMap bg = estimate_depth_map(bg_cube, chirp, {}, feed, 10.0, grid);
    const DepthMap cur = estimate_depth_map(cur_cube, chirp, {}, feed, 10.0, grid);
    const DepthMap bs = background_subtract(bg, cur);
    const DepthMap clipped = clip_negative(bs);

    bool clutter_negative = true, user_intact = true, elementwise = true;
    for (int m = 0; m < grid.size(); ++m) {
        const double raw = bs.values[static_cast<std::size_t>(m)];
        const double cl = clipped.values[static_cast<std::size_t>(m)];
        if (cl != std::max(raw, 0.0)) elementwise = false;
        if (in_block(m, 5, 5) && !(raw < 0.0 && cl == 0.0)) clutter_negative = false;
        if (in_block(m, 2, 2) && !(raw > 0.0 && cl == raw)) user_intact = false;
        if (!in_block(m, 5, 5) && !in_block(m, 2, 2) && raw != 0.0) elementwise = false;
    }
    const DetectionResult det = detect_user(clipped, grid, {2.0, 4});
    const bool centered = det.x == 3 && det.y == 3;
    char buf[176];
    std::snprintf(buf, sizeof(buf),
                  "clutter region negative and clipped: %s, user pixels untouched: %s, "
                  "detector re-finds the user at (%d, %d)",
                  clutter_negative ? "yes" : "no", user_intact ? "yes" : "no", det.x, det.y);
    report(9, "clipping removes clutter without touching user pixels",
           clutter_negative && user_intact && elementwise && centered, buf);
}

} // namespace

int main() {
    criterion_range_recovery();
    criterion_equal_gain();
    criterion_exhaustive_equivalence();
    criterion_dbscan_oracle();
    criterion_overhead();
    criterion_oversampling_gain();
    criterion_near_optimality();
    criterion_determinism();
    criterion_background_subtraction();
    std::printf("%d of 9 criteria failed\n", g_failures);
    return g_failures;
}
