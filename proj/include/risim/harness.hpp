#pragma once

// Experiment orchestration: configuration loading, background capture,
// per-sample sensing -> detection -> beam selection, aggregation, and the
// file outputs. All randomness flows from the config seed through substreams
// named by the sample's placement, so record values do not depend on the
// order samples are run in.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "risim/array.hpp"
#include "risim/beam.hpp"
#include "risim/channel.hpp"
#include "risim/detect.hpp"
#include "risim/fmcw.hpp"
#include "risim/imaging.hpp"
#include "risim/json_util.hpp"
#include "risim/scene.hpp"

namespace risim {

struct ExperimentConfig {
    std::string scene_path;
    Scene scene;
    UpaGeometry geom;
    ChirpConfig chirp;
    int grid_m_h{64};
    int grid_m_v{64};
    FieldOfView fov;
    ImagingConfig imaging;
    int osf_az{4};
    int osf_ze{4};
    DbscanParams dbscan_params;
    PathConfig path_cfg;
    std::vector<Vec3> locations;        // user footprint centers
    std::vector<Vec3> antenna_offsets;  // UE antenna offsets per location
    std::vector<int> k_list{1, 5, 25};
    std::uint64_t seed{1};
    std::string out_dir{"out"};

    SensingGrid grid() const { return sensing_grid(grid_m_h, grid_m_v, fov); }
    Codebook comm_codebook() const { return beamsteering_codebook(geom, osf_az, osf_ze); }

    // Azimuth/zenith of the AP as seen from the RIS; known in advance from
    // the deployment geometry.
    Direction ap_direction() const {
        const Vec3 d = (scene.ap_position - scene.ris_center).normalized();
        return direction_from_unit(scene.ris_orientation.to_local(d));
    }

    static ExperimentConfig from_json(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir);
    static ExperimentConfig from_file(const std::string& path);
};

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j,
                                                    const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    cfg.scene_path = jsonu::get<std::string>(j, "scene", "");
    std::filesystem::path sp(cfg.scene_path);
    if (sp.is_relative()) sp = base_dir / sp;
    cfg.scene = load_scene(sp.string());

    const auto& aj = jsonu::require(j, "array", "");
    const int n_h = jsonu::get<int>(aj, "n_h", "array");
    const int n_v = jsonu::get<int>(aj, "n_v", "array");
    const double wavelength = jsonu::get<double>(aj, "wavelength", "array");
    cfg.geom = UpaGeometry::half_wavelength(n_h, n_v, wavelength);
    if (aj.contains("spacing")) cfg.geom.spacing = aj.at("spacing").get<double>();
    cfg.geom.validate();
    cfg.path_cfg.wavelength = wavelength;

    cfg.chirp = chirp_from_json(jsonu::require(j, "chirp", ""), "chirp");

    const auto& gj = jsonu::require(j, "sensing_grid", "");
    cfg.grid_m_h = jsonu::get<int>(gj, "m_h", "sensing_grid");
    cfg.grid_m_v = jsonu::get<int>(gj, "m_v", "sensing_grid");
    cfg.fov.az_min = jsonu::get<double>(gj, "az_min", "sensing_grid");
    cfg.fov.az_max = jsonu::get<double>(gj, "az_max", "sensing_grid");
    cfg.fov.ze_min = jsonu::get<double>(gj, "ze_min", "sensing_grid");
    cfg.fov.ze_max = jsonu::get<double>(gj, "ze_max", "sensing_grid");

    if (j.contains("imaging")) {
        const auto& ij = j.at("imaging");
        cfg.imaging.pad_factor = jsonu::get_or<int>(ij, "pad_factor", 8);
        cfg.imaging.threshold = jsonu::get_or<double>(ij, "threshold", 4.0);
    }
    cfg.imaging.validate();

    const auto& cj = jsonu::require(j, "comm_codebook", "");
    cfg.osf_az = jsonu::get<int>(cj, "osf_az", "comm_codebook");
    cfg.osf_ze = jsonu::get<int>(cj, "osf_ze", "comm_codebook");

    if (j.contains("dbscan")) {
        const auto& dj = j.at("dbscan");
        cfg.dbscan_params.eps = jsonu::get_or<double>(dj, "eps", 2.0);
        cfg.dbscan_params.min_pts = jsonu::get_or<int>(dj, "min_pts", 5);
    }

    if (j.contains("path_synthesis")) {
        const auto& pj = j.at("path_synthesis");
        cfg.path_cfg.a_ref = jsonu::get_or<double>(pj, "a_ref", 1.0);
        cfg.path_cfg.clutter_gain = jsonu::get_or<double>(pj, "clutter_gain", 10.0);
        if (pj.contains("clutter_pairs")) {
            for (const auto& pair : pj.at("clutter_pairs")) {
                if (!pair.is_array() || pair.size() != 2)
                    throw ConfigError("'path_synthesis.clutter_pairs' entries must be [i, j]");
                cfg.path_cfg.clutter_pairs.emplace_back(pair[0].get<int>(), pair[1].get<int>());
            }
        }
    }

    const auto& pl = jsonu::require(j, "placements", "");
    for (const auto& v : jsonu::require(pl, "locations", "placements"))
        cfg.locations.push_back(jsonu::parse_vec3(v, "placements.locations"));
    for (const auto& v : jsonu::require(pl, "antenna_offsets", "placements"))
        cfg.antenna_offsets.push_back(jsonu::parse_vec3(v, "placements.antenna_offsets"));

    if (j.contains("k_list")) {
        cfg.k_list.clear();
        for (const auto& v : j.at("k_list")) cfg.k_list.push_back(v.get<int>());
        if (cfg.k_list.empty()) throw ConfigError("'k_list' must not be empty");
    }
    cfg.seed = jsonu::get_or<std::uint64_t>(j, "seed", 1);
    cfg.out_dir = jsonu::get_or<std::string>(j, "out_dir", "out");
    return cfg;
}

inline ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON in config: ") + e.what());
    }
    return from_json(j, std::filesystem::path(path).parent_path());
}

// ---- seed streams -----------------------------------------------------------

namespace detail {

inline std::uint64_t bits_of(double v) {
    std::uint64_t u;
    static_assert(sizeof(u) == sizeof(v));
    std::memcpy(&u, &v, sizeof(u));
    return u;
}

} // namespace detail

constexpr std::uint64_t kBackgroundStream = 0;

// Sample noise stream named by the placement itself (not by list position),
// so permuting the placement list permutes records without changing values.
inline std::uint64_t placement_stream(const Vec3& location, const Vec3& antenna_offset) {
    std::uint64_t h = 0x9d39247e33776d41ULL;
    for (double v : {location.x, location.y, location.z, antenna_offset.x,
                     antenna_offset.y, antenna_offset.z})
        h = detail::mix64(h ^ detail::bits_of(v));
    return h | 1; // stream 0 is reserved for the background
}

// ---- background capture -------------------------------------------------------

// Sweep and image the user-free scene. The offline background map every
// detection run subtracts against.
inline DepthMap run_background(const ExperimentConfig& cfg, int n_threads = 1) {
    const Scene bare = cfg.scene.without_user();
    const SensingGrid grid = cfg.grid();
    const SensingSetup setup = build_sensing_setup(cfg.geom, bare, grid);
    const SensingCube cube = sweep(cfg.chirp, bare, cfg.path_cfg, setup,
                                   Rng::derive_seed(cfg.seed, kBackgroundStream), n_threads);
    return estimate_depth_map(cube, cfg.chirp, cfg.imaging, bare.feed_distance(),
                              bare.max_depth, grid);
}

// ---- per-sample pipeline ------------------------------------------------------

struct SampleOutcome {
    int location_id{0};
    int offset_id{0};
    bool detected{false};
    DetectionResult detection{};
    ChannelVector h_t; // AP -> RIS, with the user present
    ChannelVector h_r; // RIS -> UE antenna
    double sweep_seconds{0};
    double process_seconds{0};
};

inline Scene place_user(const ExperimentConfig& cfg, const Vec3& location,
                        const Vec3& antenna_offset) {
    if (!cfg.scene.user)
        throw ConfigError("scene has no 'user' body template; experiment needs one");
    Scene s = cfg.scene;
    s.user->footprint_center = location;
    s.user->antenna_offset = antenna_offset;
    s.user->validate();
    return s;
}

// One placement: sweep with the user present, estimate the depth map,
// subtract the background, detect, and synthesize the true channels used for
// evaluation. Detection failure is recorded, not replaced.
inline SampleOutcome run_sample(const ExperimentConfig& cfg, const DepthMap& background,
                                int location_id, int offset_id, int n_threads = 1) {
    SampleOutcome out;
    out.location_id = location_id;
    out.offset_id = offset_id;
    const Vec3& loc = cfg.locations[static_cast<std::size_t>(location_id)];
    const Vec3& off = cfg.antenna_offsets[static_cast<std::size_t>(offset_id)];
    const Scene s = place_user(cfg, loc, off);

    const auto t0 = std::chrono::steady_clock::now();
    const SensingGrid grid = cfg.grid();
    const SensingSetup setup = build_sensing_setup(cfg.geom, s, grid);
    const SensingCube cube = sweep(cfg.chirp, s, cfg.path_cfg, setup,
                                   Rng::derive_seed(cfg.seed, placement_stream(loc, off)),
                                   n_threads);
    const auto t1 = std::chrono::steady_clock::now();

    const DepthMap depth = estimate_depth_map(cube, cfg.chirp, cfg.imaging,
                                              s.feed_distance(), s.max_depth, grid);
    const DepthMap clipped = clip_negative(background_subtract(background, depth));
    try {
        out.detection = detect_user(clipped, grid, cfg.dbscan_params);
        out.detected = true;
    } catch (const UserNotFoundError&) {
        out.detected = false;
    }
    out.h_t = channel_from_paths(cfg.geom, comm_paths(s, cfg.path_cfg, s.ap_position));
    out.h_r = channel_from_paths(cfg.geom,
                                 comm_paths(s, cfg.path_cfg, s.user->antenna_position()));
    const auto t2 = std::chrono::steady_clock::now();
    out.sweep_seconds = std::chrono::duration<double>(t1 - t0).count();
    out.process_seconds = std::chrono::duration<double>(t2 - t1).count();
    return out;
}

// ---- evaluation and aggregation ----------------------------------------------

struct RunRecord {
    int location_id{0};
    int offset_id{0};
    bool detected{false};
    DetectionResult detection{};
    std::vector<double> topk_ratio; // parallel to k_list; empty if not detected
    double exhaustive_ratio{0};
    double sweep_seconds{0};
    double process_seconds{0};
    double select_seconds{0};
};

struct ExperimentResult {
    std::vector<int> k_list;
    int codebook_size{0};
    std::vector<RunRecord> records;
    int detected_count{0};
    // aggregates over detection-success samples; power-mean expressed in dB
    std::vector<double> mean_topk_db;
    std::vector<double> overhead_ratio;
    double mean_exhaustive_db{0};

    double detection_rate() const {
        return records.empty() ? 0.0
                               : static_cast<double>(detected_count) / records.size();
    }
};

// Rank/evaluate each detected sample against the codebook and aggregate the
// normalized gains (mean of power ratios, reported in dB).
inline ExperimentResult evaluate_samples(const ExperimentConfig& cfg,
                                         const std::vector<SampleOutcome>& outcomes,
                                         const Codebook& cb) {
    ExperimentResult result;
    result.k_list = cfg.k_list;
    result.codebook_size = cb.size();
    const Direction theta_ap = cfg.ap_direction();

    std::vector<double> power_sum(cfg.k_list.size(), 0.0);
    double exhaustive_power_sum = 0.0;
    for (const SampleOutcome& s : outcomes) {
        RunRecord rec;
        rec.location_id = s.location_id;
        rec.offset_id = s.offset_id;
        rec.detected = s.detected;
        rec.detection = s.detection;
        rec.sweep_seconds = s.sweep_seconds;
        rec.process_seconds = s.process_seconds;
        if (s.detected) {
            const auto t0 = std::chrono::steady_clock::now();
            const InteractionVector psi = design_interaction_vector(
                cfg.geom, theta_ap, {s.detection.azimuth, s.detection.zenith});
            const BeamRanking ranking = rank_beams(psi, cb);
            const GainReport report = evaluate_topk(s.h_t, s.h_r, ranking, cb, cfg.k_list);
            rec.select_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            for (std::size_t i = 0; i < report.entries.size(); ++i) {
                rec.topk_ratio.push_back(report.entries[i].gain_ratio);
                power_sum[i] += report.entries[i].gain_ratio * report.entries[i].gain_ratio;
            }
            rec.exhaustive_ratio = report.exhaustive_ratio;
            exhaustive_power_sum += report.exhaustive_ratio * report.exhaustive_ratio;
            ++result.detected_count;
        }
        result.records.push_back(std::move(rec));
    }
    for (std::size_t i = 0; i < cfg.k_list.size(); ++i) {
        const double mean_power =
            result.detected_count ? power_sum[i] / result.detected_count : 0.0;
        result.mean_topk_db.push_back(10.0 * std::log10(mean_power));
        result.overhead_ratio.push_back(static_cast<double>(cfg.k_list[i]) / cb.size());
    }
    result.mean_exhaustive_db =
        10.0 * std::log10(result.detected_count ? exhaustive_power_sum / result.detected_count
                                                : 0.0);
    return result;
}

// Full batch: one sample per (location, antenna offset) pair, in listed order.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const DepthMap& background,
                                       int n_threads = 1) {
    std::vector<SampleOutcome> outcomes;
    for (std::size_t li = 0; li < cfg.locations.size(); ++li)
        for (std::size_t oi = 0; oi < cfg.antenna_offsets.size(); ++oi)
            outcomes.push_back(run_sample(cfg, background, static_cast<int>(li),
                                          static_cast<int>(oi), n_threads));
    return evaluate_samples(cfg, outcomes, cfg.comm_codebook());
}

// ---- file outputs -------------------------------------------------------------
// Result CSVs and PGMs are byte-reproducible for a fixed (config, seed);
// wall-clock timings go to a separate .log file for that reason.

inline void write_records_csv(const ExperimentResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "location_id,offset_id,detected,pixel_x,pixel_y,flat_index,azimuth_rad,zenith_rad";
    for (int k : result.k_list) out << ",gain_db_top" << k;
    out << ",exhaustive_gain_db\n";
    char buf[64];
    for (const RunRecord& r : result.records) {
        out << r.location_id << ',' << r.offset_id << ',' << (r.detected ? 1 : 0);
        if (r.detected) {
            out << ',' << r.detection.x << ',' << r.detection.y << ','
                << r.detection.flat_index;
            std::snprintf(buf, sizeof(buf), ",%.17g", r.detection.azimuth);
            out << buf;
            std::snprintf(buf, sizeof(buf), ",%.17g", r.detection.zenith);
            out << buf;
            for (double ratio : r.topk_ratio) {
                std::snprintf(buf, sizeof(buf), ",%.17g", ratio_to_db(ratio));
                out << buf;
            }
            std::snprintf(buf, sizeof(buf), ",%.17g", ratio_to_db(r.exhaustive_ratio));
            out << buf << '\n';
        } else {
            out << ",,,,,";
            for (std::size_t i = 0; i < result.k_list.size(); ++i) out << ',';
            out << ",\n";
        }
    }
}

inline void write_aggregate_csv(const ExperimentResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "k,mean_normalized_gain_db,overhead_ratio,mean_exhaustive_gain_db\n";
    char buf[96];
    for (std::size_t i = 0; i < result.k_list.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", result.k_list[i],
                      result.mean_topk_db[i], result.overhead_ratio[i],
                      result.mean_exhaustive_db);
        out << buf;
    }
}

inline void write_detections_json(const ExperimentResult& result, const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const RunRecord& r : result.records) {
        nlohmann::json rec{{"location_id", r.location_id},
                           {"offset_id", r.offset_id},
                           {"found", r.detected}};
        if (r.detected) rec["detection"] = detection_to_json(r.detection);
        arr.push_back(rec);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << arr.dump(2) << '\n';
}

inline void write_timings_log(const ExperimentResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const RunRecord& r : result.records) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "location=%d offset=%d sweep=%.3fs process=%.3fs select=%.3fs\n",
                      r.location_id, r.offset_id, r.sweep_seconds, r.process_seconds,
                      r.select_seconds);
        out << buf;
    }
}

inline nlohmann::json summary_json(const ExperimentResult& result) {
    return {{"samples", result.records.size()},
            {"detected", result.detected_count},
            {"detection_rate", result.detection_rate()},
            {"codebook_size", result.codebook_size}};
}

} // namespace risim
