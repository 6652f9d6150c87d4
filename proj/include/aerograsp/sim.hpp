#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aerograsp/camera.hpp"
#include "aerograsp/control.hpp"
#include "aerograsp/detect.hpp"
#include "aerograsp/errors.hpp"
#include "aerograsp/frames.hpp"
#include "aerograsp/gripper.hpp"
#include "aerograsp/mission.hpp"

namespace aerograsp {

enum class Carrier { Ground, Platform };

/// A rectangular plate the MAV can pick up. pose.translation is the CoG
/// projected onto the top surface (the plane the camera sees and the gripper
/// seats on); the plate bottom sits at top minus thickness.
struct WorldObject {
    double width = 0.35;   // m
    double depth = 0.35;   // m
    double thickness = 0.004;
    double bend_angle_deg = 0.0;  // sign = bend up/down; 0 = flat
    double mass = 0.6;            // kg
    ObjectClass color_class = ObjectClass::Red;
    bool ferrous = true;
    RigidTransform pose = RigidTransform::identity();
    Carrier carrier = Carrier::Ground;
};

struct WindModel {
    double mean_speed = 0.0;      // m/s
    double gust_amplitude = 0.0;  // m/s, stationary std of the OU gust
    double direction_deg = 0.0;   // world heading the wind blows toward
    double correlation_time = 1.5;  // s, OU time constant
    double drag_coefficient = 0.012;  // N/(m/s)^2 on the airframe
};

enum class ExperimentType { Static, Wind, Dynamic };

const char* to_string(ExperimentType type);

struct ScenarioConfig {
    std::vector<WorldObject> objects;
    Vec2 platform_velocity = Vec2::Zero();  // m/s, moves Platform-carried objects
    WindModel wind;
    MissionParams mission;
    PidState pid;  // gains/saturation template for the mission servo
    double tracker_natural_frequency = 2.5;
    double tracker_damping = 1.0;
    double observer_process_noise = 0.01;       // N^2/s
    double observer_measurement_noise = 0.0025; // (m/s^2)^2
    CameraIntrinsics camera = CameraIntrinsics::synthetic_default();
    Vec3 camera_translation = Vec3::Zero();  // camera origin in the MAV frame
    double support_plane_z = 0.0;            // world z of object top surfaces
    std::uint64_t seed = 1;
    double max_sim_time = 60.0;  // s
    double mav_mass = 3.5;       // kg
    Vec3 mav_start = Vec3(0.0, 0.0, 1.5);
    double drop_radius = 0.25;   // m, delivery counts inside this circle
    // Perception noise: white centroid jitter plus occasional reflection-like
    // CoG displacement.
    double detection_jitter_px = 1.5;
    double reflection_probability = 0.0;
    double reflection_offset_min = 0.03;  // m
    double reflection_offset_max = 0.08;  // m
    ExperimentType experiment = ExperimentType::Static;
    bool record_ticks = true;
    // When non-empty, every camera frame is saved there as frame_NNNNNN.ppm.
    // Set by the CLI, not a scenario-file key.
    std::string frame_dump_dir;
};

enum class Outcome { Delivered, DroppedOutside, ObjectLostUnrecovered, Timeout };

const char* to_string(Outcome outcome);

struct TickRecord {
    double time = 0.0;
    Vec3 mav_position = Vec3::Zero();
    Phase phase = Phase::Localize;
    int detections = 0;
    double force_estimate_z = 0.0;
    double gripper_energy_mwh = 0.0;
};

struct TransitionRecord {
    double time = 0.0;
    Phase phase = Phase::Localize;
    double t_wait = 0.0;
    int attempts = 0;
    Vec2 target_xy = Vec2::Zero();
    GripperCommand gripper_cmd = GripperCommand::None;
};

struct MissionLog {
    std::vector<TickRecord> ticks;
    std::vector<TransitionRecord> transitions;
    Outcome outcome = Outcome::Timeout;
    int pickup_tries = 0;
    double energy_mwh = 0.0;
    double duration_s = 0.0;
};

/// Runs one full mission at dt = 0.01 s with camera frames every 0.05 s.
/// Deterministic for a given config (including seed).
MissionLog run_mission(const ScenarioConfig& config);

struct CampaignStats {
    ExperimentType experiment_type = ExperimentType::Static;
    int runs = 0;
    int successes = 0;
    double success_rate = 0.0;
    int total_pickup_tries = 0;
};

struct CampaignRun {
    int run_index = 0;
    std::uint64_t seed = 0;
    Outcome outcome = Outcome::Timeout;
    int pickup_tries = 0;
    double energy_mwh = 0.0;
    double duration_s = 0.0;
};

struct CampaignResult {
    CampaignStats stats;
    std::vector<CampaignRun> runs;  // ordered by run index
};

/// Monte Carlo campaign: randomizes object placement/bend, wind realization or
/// platform direction per the experiment type, with per-run seeds derived from
/// the campaign seed. Runs may execute in parallel; the result is identical
/// either way.
CampaignResult monte_carlo(const ScenarioConfig& base_config, ExperimentType experiment,
                           int n_runs, std::uint64_t seed);

/// Deterministic per-run seed derivation (splitmix64 over the campaign seed).
std::uint64_t derive_seed(std::uint64_t campaign_seed, int run_index);

}  // namespace aerograsp
