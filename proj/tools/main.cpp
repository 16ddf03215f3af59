// Command-line front end of the simulator. Subcommands cover the pieces of
// the pipeline (background capture, sensing sweep, detection, beam selection)
// and the full batch experiment; all of them read the same JSON experiment
// config and write their artifacts into the output directory.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "risim/harness.hpp"

namespace fs = std::filesystem;
using namespace risim;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_override;
    std::uint64_t seed{0};
    bool seed_set{false};
    int threads{1};
};

ExperimentConfig load_config(const CommonArgs& args) {
    ExperimentConfig cfg = ExperimentConfig::from_file(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    if (!args.out_override.empty()) cfg.out_dir = args.out_override;
    fs::create_directories(cfg.out_dir);
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config JSON")->required();
    cmd->add_option("--seed", args.seed, "override the config seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads for the sweep")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", args.out_override, "override the output directory");
}

std::uint64_t sample_seed(const ExperimentConfig& cfg, int location, int offset) {
    if (cfg.locations.empty()) return cfg.seed;
    return Rng::derive_seed(
        cfg.seed, placement_stream(cfg.locations[static_cast<std::size_t>(location)],
                                   cfg.antenna_offsets[static_cast<std::size_t>(offset)]));
}

Scene scene_for_sample(const ExperimentConfig& cfg, int location, int offset) {
    if (cfg.locations.empty()) return cfg.scene;
    if (location < 0 || location >= static_cast<int>(cfg.locations.size()) ||
        offset < 0 || offset >= static_cast<int>(cfg.antenna_offsets.size()))
        throw ConfigError("location/offset index outside the configured placements");
    return place_user(cfg, cfg.locations[static_cast<std::size_t>(location)],
                      cfg.antenna_offsets[static_cast<std::size_t>(offset)]);
}

int cmd_background(const CommonArgs& args) {
    const ExperimentConfig cfg = load_config(args);
    const DepthMap bg = run_background(cfg, args.threads);
    const fs::path out(cfg.out_dir);
    write_depth_csv(bg, (out / "background.csv").string());
    write_depth_pgm(bg, cfg.scene.max_depth, (out / "background.pgm").string());
    std::cout << "background map " << bg.m_h << "x" << bg.m_v << " -> "
              << (out / "background.csv").string() << "\n";
    return 0;
}

int cmd_sense(const CommonArgs& args, int location, int offset) {
    const ExperimentConfig cfg = load_config(args);
    const Scene s = scene_for_sample(cfg, location, offset);
    const SensingGrid grid = cfg.grid();
    const SensingSetup setup = build_sensing_setup(cfg.geom, s, grid);
    const SensingCube cube = sweep(cfg.chirp, s, cfg.path_cfg, setup,
                                   sample_seed(cfg, location, offset), args.threads);
    const fs::path out(cfg.out_dir);
    save_cube(cube, cfg.chirp, (out / "cube.bin").string(), (out / "cube.json").string());
    std::cout << "sensing cube " << cube.m_sample << "x" << cube.m_s << " -> "
              << (out / "cube.bin").string() << "\n";
    return 0;
}

int cmd_detect(const CommonArgs& args, std::string cube_path, std::string background_path) {
    const ExperimentConfig cfg = load_config(args);
    const fs::path out(cfg.out_dir);
    if (cube_path.empty()) cube_path = (out / "cube.bin").string();
    if (background_path.empty()) background_path = (out / "background.csv").string();
    const std::string sidecar = fs::path(cube_path).replace_extension(".json").string();

    const auto [cube, chirp] = load_cube(cube_path, sidecar);
    const SensingGrid grid = cfg.grid();
    const DepthMap depth = estimate_depth_map(cube, chirp, cfg.imaging,
                                              cfg.scene.feed_distance(),
                                              cfg.scene.max_depth, grid);
    const DepthMap background = read_depth_csv(background_path);
    const DepthMap clipped = clip_negative(background_subtract(background, depth));

    nlohmann::json record;
    try {
        const DetectionResult det = detect_user(clipped, grid, cfg.dbscan_params);
        record = detection_to_json(det);
        record["found"] = true;
        std::cout << "user at pixel (" << det.x << ", " << det.y << "), flat index "
                  << det.flat_index << "\n";
    } catch (const UserNotFoundError&) {
        record = {{"found", false}};
        std::cout << "user not found\n";
    }
    std::ofstream js((out / "detection.json").string());
    if (!js) throw std::runtime_error("cannot open for writing: detection.json");
    js << record.dump(2) << '\n';
    return 0;
}

int cmd_select(const CommonArgs& args, std::string detection_path, int location, int offset) {
    const ExperimentConfig cfg = load_config(args);
    const fs::path out(cfg.out_dir);
    if (detection_path.empty()) detection_path = (out / "detection.json").string();
    std::ifstream in(detection_path);
    if (!in) throw std::runtime_error("cannot open detection record: " + detection_path);
    nlohmann::json j;
    in >> j;
    if (!jsonu::get_or<bool>(j, "found", true))
        throw std::runtime_error("detection record contains no user; nothing to select");
    const DetectionResult det = detection_from_json(j);

    const Scene s = scene_for_sample(cfg, location, offset);
    const Vec3 endpoint = s.user ? s.user->antenna_position() : s.ap_position;
    const ChannelVector h_t =
        channel_from_paths(cfg.geom, comm_paths(s, cfg.path_cfg, s.ap_position));
    const ChannelVector h_r = channel_from_paths(cfg.geom, comm_paths(s, cfg.path_cfg, endpoint));

    const InteractionVector psi = design_interaction_vector(
        cfg.geom, cfg.ap_direction(), {det.azimuth, det.zenith});
    const Codebook cb = cfg.comm_codebook();
    const BeamRanking ranking = rank_beams(psi, cb);
    const GainReport report = evaluate_topk(h_t, h_r, ranking, cb, cfg.k_list);
    write_gain_csv(report, (out / "topk.csv").string());
    std::cout << "ranked " << cb.size() << " beams; exhaustive best " << report.exhaustive_index
              << " at " << report.exhaustive_db << " dB -> " << (out / "topk.csv").string()
              << "\n";
    return 0;
}

int cmd_experiment(const CommonArgs& args) {
    const ExperimentConfig cfg = load_config(args);
    const fs::path out(cfg.out_dir);
    const DepthMap bg = run_background(cfg, args.threads);
    write_depth_csv(bg, (out / "background.csv").string());
    write_depth_pgm(bg, cfg.scene.max_depth, (out / "background.pgm").string());

    const ExperimentResult result = run_experiment(cfg, bg, args.threads);
    write_records_csv(result, (out / "records.csv").string());
    write_aggregate_csv(result, (out / "topk_gains.csv").string());
    write_detections_json(result, (out / "detections.json").string());
    write_timings_log(result, (out / "timings.log").string());
    std::ofstream js((out / "summary.json").string());
    js << summary_json(result).dump(2) << '\n';

    std::cout << result.records.size() << " samples, " << result.detected_count
              << " detected";
    for (std::size_t i = 0; i < result.k_list.size(); ++i)
        std::cout << ", top-" << result.k_list[i] << " " << result.mean_topk_db[i] << " dB";
    std::cout << ", exhaustive " << result.mean_exhaustive_db << " dB\n";
    return 0;
}

int cmd_export_depth(const CommonArgs& args, std::string cube_path) {
    const ExperimentConfig cfg = load_config(args);
    const fs::path out(cfg.out_dir);
    if (cube_path.empty()) cube_path = (out / "cube.bin").string();
    const std::string sidecar = fs::path(cube_path).replace_extension(".json").string();
    const auto [cube, chirp] = load_cube(cube_path, sidecar);
    const DepthMap depth = estimate_depth_map(cube, chirp, cfg.imaging,
                                              cfg.scene.feed_distance(),
                                              cfg.scene.max_depth, cfg.grid());
    write_depth_csv(depth, (out / "depth.csv").string());
    write_depth_pgm(depth, cfg.scene.max_depth, (out / "depth.pgm").string());
    std::cout << "depth map -> " << (out / "depth.csv").string() << " and depth.pgm\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS integrated imaging and communication simulator"};
    app.require_subcommand(1);

    CommonArgs args;
    int location = 0, offset = 0;
    std::string cube_path, background_path, detection_path;

    CLI::App* background = app.add_subcommand("background", "capture the user-free depth map");
    add_common(background, args);

    CLI::App* sense = app.add_subcommand("sense", "sweep the sensing codebook and save the cube");
    add_common(sense, args);
    sense->add_option("--location", location, "placement index into the config locations");
    sense->add_option("--offset", offset, "antenna offset index");

    CLI::App* detect = app.add_subcommand("detect", "detect the user in a saved cube");
    add_common(detect, args);
    detect->add_option("--cube", cube_path, "sensing cube .bin (default <out>/cube.bin)");
    detect->add_option("--background", background_path,
                       "background depth CSV (default <out>/background.csv)");

    CLI::App* select = app.add_subcommand("select", "rank codebook beams from a detection");
    add_common(select, args);
    select->add_option("--detection", detection_path,
                       "detection JSON (default <out>/detection.json)");
    select->add_option("--location", location, "placement index for the true channels");
    select->add_option("--offset", offset, "antenna offset index");

    CLI::App* experiment = app.add_subcommand("experiment", "run the full batch experiment");
    add_common(experiment, args);

    CLI::App* export_depth = app.add_subcommand("export-depth", "depth map of a saved cube");
    add_common(export_depth, args);
    export_depth->add_option("--cube", cube_path, "sensing cube .bin (default <out>/cube.bin)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (background->parsed()) return cmd_background(args);
        if (sense->parsed()) return cmd_sense(args, location, offset);
        if (detect->parsed()) return cmd_detect(args, cube_path, background_path);
        if (select->parsed()) return cmd_select(args, detection_path, location, offset);
        if (experiment->parsed()) return cmd_experiment(args);
        if (export_depth->parsed()) return cmd_export_depth(args, cube_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
