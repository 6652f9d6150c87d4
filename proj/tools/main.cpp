#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "aerograsp/scenario.hpp"
#include "aerograsp/sim.hpp"

namespace {

using namespace aerograsp;

constexpr int kExitSuccess = 0;
constexpr int kExitMissionFailed = 2;
constexpr int kExitConfigError = 3;

std::string fmt(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) {
        throw ConfigInvalid("cannot write to '" + dir + "/" + name + "'");
    }
    out << content;
}

std::string summary_line(const MissionLog& log) {
    std::ostringstream out;
    out << to_string(log.outcome) << ',' << log.pickup_tries << ',' << fmt(log.energy_mwh)
        << ',' << fmt(log.duration_s) << '\n';
    return out.str();
}

std::string transitions_csv(const MissionLog& log) {
    std::ostringstream out;
    out << "time,phase,t_wait,attempts,target_x,target_y,gripper\n";
    for (const TransitionRecord& row : log.transitions) {
        out << fmt(row.time) << ',' << to_string(row.phase) << ',' << fmt(row.t_wait) << ','
            << row.attempts << ',' << fmt(row.target_xy.x()) << ',' << fmt(row.target_xy.y())
            << ',' << to_string(row.gripper_cmd) << '\n';
    }
    return out.str();
}

std::string ticks_csv(const MissionLog& log) {
    std::ostringstream out;
    out << "time,x,y,z,phase,detections,force_z,energy_mwh\n";
    for (const TickRecord& row : log.ticks) {
        out << fmt(row.time) << ',' << fmt(row.mav_position.x()) << ','
            << fmt(row.mav_position.y()) << ',' << fmt(row.mav_position.z()) << ','
            << to_string(row.phase) << ',' << row.detections << ','
            << fmt(row.force_estimate_z) << ',' << fmt(row.gripper_energy_mwh) << '\n';
    }
    return out.str();
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed, bool dump_frames) {
    ScenarioConfig config = load_scenario(scenario_path);
    if (seed) {
        config.seed = *seed;
    }
    if (dump_frames) {
        if (out_dir.empty()) {
            throw ConfigInvalid("--frames requires --out");
        }
        std::filesystem::create_directories(out_dir + "/frames");
        config.frame_dump_dir = out_dir + "/frames";
    }

    const MissionLog log = run_mission(config);
    const std::string summary = summary_line(log);
    if (!out_dir.empty()) {
        write_file(out_dir, "summary.csv",
                   "outcome,pickup_tries,energy_mWh,duration_s\n" + summary);
        write_file(out_dir, "transitions.csv", transitions_csv(log));
        if (config.record_ticks) {
            write_file(out_dir, "ticks.csv", ticks_csv(log));
        }
    }
    std::cout << summary;
    return log.outcome == Outcome::Delivered ? kExitSuccess : kExitMissionFailed;
}

int cmd_montecarlo(const std::string& scenario_path, const std::string& type_name, int runs,
                   std::optional<std::uint64_t> seed, const std::string& out_dir) {
    ScenarioConfig config = load_scenario(scenario_path);
    ExperimentType type = ExperimentType::Static;
    if (type_name == "static") {
        type = ExperimentType::Static;
    } else if (type_name == "wind") {
        type = ExperimentType::Wind;
    } else if (type_name == "dynamic") {
        type = ExperimentType::Dynamic;
    } else {
        throw ConfigInvalid("bad value '" + type_name + "' for --type");
    }
    const std::uint64_t campaign_seed = seed.value_or(config.seed);

    const CampaignResult result = monte_carlo(config, type, runs, campaign_seed);

    std::ostringstream rows;
    rows << "run,seed,outcome,pickup_tries,energy_mWh,duration_s\n";
    for (const CampaignRun& run : result.runs) {
        rows << run.run_index << ',' << run.seed << ',' << to_string(run.outcome) << ','
             << run.pickup_tries << ',' << fmt(run.energy_mwh) << ',' << fmt(run.duration_s)
             << '\n';
    }
    std::ostringstream summary;
    summary << "type,runs,successes,rate,tries\n"
            << to_string(result.stats.experiment_type) << ',' << result.stats.runs << ','
            << result.stats.successes << ',' << fmt(result.stats.success_rate) << ','
            << result.stats.total_pickup_tries << '\n';

    if (!out_dir.empty()) {
        write_file(out_dir, "runs.csv", rows.str());
        write_file(out_dir, "campaign.csv", summary.str());
    }
    std::cout << rows.str() << summary.str();
    return kExitSuccess;
}

int cmd_offset_sweep(double mass, double bend_deg, double half_width, double accel_g,
                     int steps, const std::string& out_dir) {
    if (steps < 2) {
        throw ConfigInvalid("--steps must be at least 2");
    }
    if (mass <= 0.0 || half_width <= 0.0 || accel_g < 0.0) {
        throw ConfigInvalid("offset sweep needs positive mass/half-width and accel >= 0");
    }
    const MagneticCircuit circuit = MagneticCircuit::calibrated_default();
    const ComplianceModel compliance = ComplianceModel::calibrated_default();
    const GripperState gripper{Polarity::On, 0.0, false, 15.0, 80.0, 2.5};

    std::ostringstream out;
    out << "offset_mm,pitch_deg,result\n";
    for (int i = 0; i < steps; ++i) {
        const double offset = half_width * double(i) / double(steps - 1);
        const GripTarget target{Vec3::Zero(), half_width, half_width, 0.0, bend_deg, true};
        const GripOutcome grip =
            attempt_grip(Vec3(offset, 0.0, 0.0), gripper, circuit, compliance, target);
        std::string result = "missed";
        double pitch = 0.0;
        if (grip.attached) {
            pitch = grip.suspension_pitch;
            result = to_string(hold_under_acceleration(grip, compliance, mass, accel_g));
        }
        out << fmt(offset * 1000.0) << ',' << fmt(pitch) << ',' << result << '\n';
    }
    if (!out_dir.empty()) {
        write_file(out_dir, "offset_sweep.csv", out.str());
    }
    std::cout << out.str();
    return kExitSuccess;
}

int cmd_magnet(int steps, double max_gap_mm, const std::string& out_dir) {
    if (steps < 2) {
        throw ConfigInvalid("--steps must be at least 2");
    }
    const MagneticCircuit circuit = MagneticCircuit::calibrated_default();
    std::ostringstream out;
    out << "extra_gap_mm,force_on_N,force_off_N\n";
    for (int i = 0; i < steps; ++i) {
        const double gap_mm = max_gap_mm * double(i) / double(steps - 1);
        const double gap = gap_mm * 1e-3;
        out << fmt(gap_mm) << ',' << fmt(circuit_force(circuit, Polarity::On, gap)) << ','
            << fmt(circuit_force(circuit, Polarity::Off, gap)) << '\n';
    }
    if (!out_dir.empty()) {
        write_file(out_dir, "magnet.csv", out.str());
    }
    std::cout << out.str();
    return kExitSuccess;
}

int cmd_detect(const std::string& image_path, const std::string& out_dir) {
    const ImageBuffer img = load_ppm(image_path);
    std::ostringstream out;
    for (const DetectedObject& det : detect_objects(img, ColorThresholds::defaults())) {
        out << to_string(det.color_class) << ',' << fmt(det.centroid_px.x()) << ','
            << fmt(det.centroid_px.y()) << ',' << fmt(det.area_fraction) << '\n';
    }
    if (!out_dir.empty()) {
        write_file(out_dir, "detections.csv", out.str());
    }
    std::cout << out.str();
    return kExitSuccess;
}

int cmd_render(const std::string& scenario_path, const std::vector<double>& pose,
               const std::string& out_dir) {
    const ScenarioConfig config = load_scenario(scenario_path);
    Vec3 position = config.mav_start;
    if (!pose.empty()) {
        if (pose.size() != 3) {
            throw ConfigInvalid("--pose needs exactly three values: x y z");
        }
        position = Vec3(pose[0], pose[1], pose[2]);
    }

    WorldSnapshot world;
    for (const WorldObject& obj : config.objects) {
        const Mat3& m = obj.pose.rotation.matrix();
        Rgb color{25, 25, 25};
        if (obj.color_class == ObjectClass::Red) {
            color = Rgb{200, 30, 30};
        } else if (obj.color_class == ObjectClass::Blue) {
            color = Rgb{30, 60, 200};
        }
        world.surfaces.push_back(SurfaceRect{obj.pose.translation.x(), obj.pose.translation.y(),
                                             obj.width / 2.0, obj.depth / 2.0,
                                             std::atan2(m(1, 0), m(0, 0)),
                                             obj.pose.translation.z(), color});
    }
    const ExtrinsicCalibration mount =
        ExtrinsicCalibration::down_looking(config.camera_translation);
    const RigidTransform camera_pose{mount.rotation_mav_to_camera,
                                     position + mount.translation_mav_to_camera};
    const ImageBuffer frame = render_scene(world, camera_pose, config.camera);

    std::filesystem::create_directories(out_dir);
    save_ppm(frame, out_dir + "/frame.ppm");
    std::cout << out_dir << "/frame.ppm\n";
    return kExitSuccess;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"aerial magnetic pick-and-deliver simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir;
    std::string image_path;
    std::string type_name = "static";
    std::optional<std::uint64_t> seed;
    int runs = 20;
    bool dump_frames = false;
    double mass = 0.52;
    double bend_deg = 30.0;
    double half_width = 0.0825;
    double accel_g = 0.8;
    int steps = 50;
    double max_gap_mm = 2.0;
    std::vector<double> pose;

    CLI::App* run = app.add_subcommand("run", "run one mission from a scenario file");
    run->add_option("--scenario", scenario_path, "scenario file")->required();
    run->add_option("--out", out_dir, "directory for CSV logs");
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_flag("--frames", dump_frames, "dump every camera frame as PPM (needs --out)");

    CLI::App* mc = app.add_subcommand("montecarlo", "run a seeded campaign");
    mc->add_option("--scenario", scenario_path, "scenario file")->required();
    mc->add_option("--type", type_name, "static|wind|dynamic")->required();
    mc->add_option("--runs", runs, "number of runs")->required();
    mc->add_option("--seed", seed, "campaign seed (default: scenario seed)");
    mc->add_option("--out", out_dir, "directory for CSV outputs");

    CLI::App* sweep = app.add_subcommand("offset-sweep", "grip offset sweep to footprint edge");
    sweep->add_option("--mass", mass, "object mass, kg");
    sweep->add_option("--bend", bend_deg, "object bend angle, degrees");
    sweep->add_option("--half-width", half_width, "footprint half width, m");
    sweep->add_option("--accel", accel_g, "vertical acceleration, g above hover");
    sweep->add_option("--steps", steps, "sweep points");
    sweep->add_option("--out", out_dir, "directory for the CSV");

    CLI::App* magnet = app.add_subcommand("magnet", "holding force vs extra gap, ON and OFF");
    magnet->add_option("--steps", steps, "sweep points");
    magnet->add_option("--max-gap-mm", max_gap_mm, "largest extra gap, mm");
    magnet->add_option("--out", out_dir, "directory for the CSV");

    CLI::App* detect = app.add_subcommand("detect", "detect color blobs in a PPM image");
    detect->add_option("image", image_path, "P6 PPM image")->required();
    detect->add_option("--out", out_dir, "directory for the CSV");

    CLI::App* render = app.add_subcommand("render", "render the scenario scene to a PPM");
    render->add_option("--scenario", scenario_path, "scenario file")->required();
    render->add_option("--pose", pose, "camera mount position: x y z")->expected(3);
    render->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitSuccess : kExitConfigError;
    }

    try {
        if (run->parsed()) {
            return cmd_run(scenario_path, out_dir, seed, dump_frames);
        }
        if (mc->parsed()) {
            return cmd_montecarlo(scenario_path, type_name, runs, seed, out_dir);
        }
        if (sweep->parsed()) {
            return cmd_offset_sweep(mass, bend_deg, half_width, accel_g, steps, out_dir);
        }
        if (magnet->parsed()) {
            return cmd_magnet(steps, max_gap_mm, out_dir);
        }
        if (detect->parsed()) {
            return cmd_detect(image_path, out_dir);
        }
        if (render->parsed()) {
            return cmd_render(scenario_path, pose, out_dir);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    return kExitConfigError;
}
