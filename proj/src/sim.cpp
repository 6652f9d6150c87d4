#include "aerograsp/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <random>
#include <thread>

namespace aerograsp {

const char* to_string(ExperimentType type) {
    switch (type) {
        case ExperimentType::Static: return "static";
        case ExperimentType::Wind: return "wind";
        case ExperimentType::Dynamic: return "dynamic";
    }
    return "unknown";
}

const char* to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Delivered: return "delivered";
        case Outcome::DroppedOutside: return "dropped_outside";
        case Outcome::ObjectLostUnrecovered: return "object_lost_unrecovered";
        case Outcome::Timeout: return "timeout";
    }
    return "unknown";
}

namespace {

constexpr double kDt = 0.01;
constexpr int kTicksPerFrame = 5;  // 20 Hz camera on the 100 Hz loop
constexpr double kAttachGrace = 0.25;   // s before hold checks arm after seating
constexpr double kAccelFilterTau = 0.1; // s, suspension smooths load transients

Rgb palette(ObjectClass cls) {
    switch (cls) {
        case ObjectClass::Red: return Rgb{200, 30, 30};
        case ObjectClass::Blue: return Rgb{30, 60, 200};
        case ObjectClass::Black: return Rgb{25, 25, 25};
    }
    return Rgb{0, 0, 0};
}

Vec2 xy(const Vec3& v) { return Vec2(v.x(), v.y()); }

/// Perception-side track of the locked object: velocity is estimated from the
/// history of noisy localizations, never from ground truth.
class PerceptionTrack {
  public:
    void update(double time, const std::vector<LocalizedDetection>& detections) {
        const LocalizedDetection* match = nullptr;
        double best = kGateRadius;
        for (const LocalizedDetection& det : detections) {
            const double dist = has_point_ ? (xy(det.world_position) - last_).norm() : 0.0;
            if (!has_point_) {
                match = &det;  // first detection seeds the track
                break;
            }
            if (dist <= best) {
                best = dist;
                match = &det;
            }
        }
        if (match) {
            last_ = xy(match->world_position);
            has_point_ = true;
            history_.push_back({time, last_});
        }
        while (!history_.empty() && history_.front().first < time - kWindow) {
            history_.pop_front();
        }
        // A long gap means the track jumped targets; restart the regression.
        if (!history_.empty() && time - history_.back().first > kWindow) {
            history_.clear();
            has_point_ = false;
        }
    }

    Vec2 velocity() const {
        const int n = int(history_.size());
        if (n < 8) {
            return Vec2::Zero();
        }
        double st = 0.0, stt = 0.0;
        Vec2 sx = Vec2::Zero(), stx = Vec2::Zero();
        for (const auto& [t, p] : history_) {
            st += t;
            stt += t * t;
            sx += p;
            stx += t * p;
        }
        const double denom = n * stt - st * st;
        if (denom < 1e-12) {
            return Vec2::Zero();
        }
        return (double(n) * stx - st * sx) / denom;
    }

  private:
    static constexpr double kGateRadius = 0.5;
    static constexpr double kWindow = 1.0;  // s of history for the regression
    std::deque<std::pair<double, Vec2>> history_;
    Vec2 last_ = Vec2::Zero();
    bool has_point_ = false;
};

void validate(const ScenarioConfig& config) {
    const MissionParams& m = config.mission;
    if (!(m.operation_height > m.hover_height) || !(m.hover_height > 0.0)) {
        throw ConfigInvalid("mission heights must satisfy operation > hover > 0");
    }
    if (!(m.align_radius > 0.0) || !(m.wait_threshold > 0.0)) {
        throw ConfigInvalid("align radius and wait threshold must be positive");
    }
    if (!(m.grasp.force_threshold > 0.0)) {
        throw ConfigInvalid("grasp force threshold must be positive");
    }
    if (m.max_pickup_attempts < 1) {
        throw ConfigInvalid("max pickup attempts must be at least 1");
    }
    if (!(config.mav_mass > 0.0) || !(config.max_sim_time > 0.0) ||
        !(config.drop_radius > 0.0)) {
        throw ConfigInvalid("mav mass, sim time and drop radius must be positive");
    }
    for (const WorldObject& obj : config.objects) {
        if (!(obj.mass > 0.0) || !(obj.width > 0.0) || !(obj.depth > 0.0) ||
            !(obj.thickness > 0.0)) {
            throw ConfigInvalid("objects need positive mass and dimensions");
        }
    }
    if (config.wind.mean_speed < 0.0 || config.wind.gust_amplitude < 0.0 ||
        !(config.wind.correlation_time > 0.0)) {
        throw ConfigInvalid("wind model parameters out of range");
    }
}

/// Free fall from the current pose, carrying the release velocity; the plate
/// comes to rest flat on the ground plane.
void land_object(WorldObject& obj, const Vec3& release_velocity) {
    const double drop_height = std::max(0.0, obj.pose.translation.z() - obj.thickness);
    const double t_fall = std::sqrt(2.0 * drop_height / kGravity);
    obj.pose.translation.x() += release_velocity.x() * t_fall;
    obj.pose.translation.y() += release_velocity.y() * t_fall;
    obj.pose.translation.z() = obj.thickness;
    obj.carrier = Carrier::Ground;
}

double object_yaw(const WorldObject& obj) {
    // Footprint yaw about world z; plates are placed level, so the rotation is
    // a pure yaw and column 0 carries it.
    const Mat3& m = obj.pose.rotation.matrix();
    return std::atan2(m(1, 0), m(0, 0));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t campaign_seed, int run_index) {
    // splitmix64 over the campaign seed and the run index
    std::uint64_t z = campaign_seed + 0x9E3779B97F4A7C15ULL * (std::uint64_t(run_index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

MissionLog run_mission(const ScenarioConfig& config) {
    validate(config);

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    std::vector<WorldObject> objects = config.objects;
    TrackerState mav{config.mav_start, Vec3::Zero(), config.tracker_natural_frequency,
                     config.tracker_damping};
    const MagneticCircuit circuit = MagneticCircuit::calibrated_default();
    const ComplianceModel compliance = ComplianceModel::calibrated_default();
    GripperState gripper;
    ForceObserverState observer;
    observer.process_noise = config.observer_process_noise;
    observer.measurement_noise = config.observer_measurement_noise;
    const double measurement_sigma = std::sqrt(config.observer_measurement_noise);

    MissionState mission;
    mission.pid = config.pid;
    const TargetLocalizer localizer{config.camera,
                                    ExtrinsicCalibration::down_looking(config.camera_translation),
                                    config.support_plane_z};

    const Vec2 wind_dir(std::cos(config.wind.direction_deg * M_PI / 180.0),
                        std::sin(config.wind.direction_deg * M_PI / 180.0));
    double gust = 0.0;

    std::optional<std::size_t> attached;
    Vec3 attach_offset = Vec3::Zero();
    GripOutcome grip_outcome;
    double attach_time = -1.0;
    double filtered_accel_z = 0.0;
    std::optional<std::size_t> released_object;

    Observations obs;
    PerceptionTrack track;

    MissionLog log;
    Phase prev_phase = mission.phase;
    std::optional<Outcome> outcome;
    double end_time = 0.0;

    const int max_ticks = int(std::lround(config.max_sim_time / kDt));
    for (int k = 0; k <= max_ticks && !outcome; ++k) {
        const double t = k * kDt;
        end_time = t;

        if (k % kTicksPerFrame == 0) {
            WorldSnapshot world;
            for (const WorldObject& obj : objects) {
                world.surfaces.push_back(SurfaceRect{obj.pose.translation.x(),
                                                     obj.pose.translation.y(), obj.width / 2.0,
                                                     obj.depth / 2.0, object_yaw(obj),
                                                     obj.pose.translation.z(),
                                                     palette(obj.color_class)});
            }
            const RigidTransform camera_pose{
                Rotation::identity() * localizer.extrinsics.rotation_mav_to_camera,
                mav.position + localizer.extrinsics.translation_mav_to_camera};
            const ImageBuffer frame = render_scene(world, camera_pose, config.camera);
            if (!config.frame_dump_dir.empty()) {
                char name[32];
                std::snprintf(name, sizeof name, "/frame_%06d.ppm", k / kTicksPerFrame);
                save_ppm(frame, config.frame_dump_dir + name);
            }

            obs.detections.clear();
            const RigidTransform mav_pose{Rotation::identity(), mav.position};
            for (DetectedObject det : detect_objects(frame, ColorThresholds::defaults())) {
                det.centroid_px.x() = std::clamp(
                    det.centroid_px.x() + config.detection_jitter_px * gauss(rng), 0.0,
                    double(config.camera.width - 1));
                det.centroid_px.y() = std::clamp(
                    det.centroid_px.y() + config.detection_jitter_px * gauss(rng), 0.0,
                    double(config.camera.height - 1));
                try {
                    LocalizedDetection loc = localizer.localize(mav_pose, det);
                    if (uni(rng) < config.reflection_probability) {
                        // Specular highlights shift the apparent CoG.
                        const double angle = 2.0 * M_PI * uni(rng);
                        const double radius =
                            config.reflection_offset_min +
                            (config.reflection_offset_max - config.reflection_offset_min) *
                                uni(rng);
                        loc.world_position.x() += radius * std::cos(angle);
                        loc.world_position.y() += radius * std::sin(angle);
                    }
                    obs.detections.push_back(loc);
                } catch (const Error&) {
                    // Rays that miss the support plane are dropped.
                }
            }
            track.update(t, obs.detections);
        }

        obs.mav_pose = RigidTransform{Rotation::identity(), mav.position};
        obs.mav_velocity = mav.velocity;
        obs.grasp_flag = grasp_detected(observer, config.mission.grasp);
        obs.object_xy_velocity_estimate = track.velocity();

        const MissionCommand cmd = mission_step(mission, config.mission, obs, kDt);

        if (cmd.gripper_command == GripperCommand::On) {
            switch_polarity(gripper, Polarity::On);
            const Vec3 grip_point =
                mav.position - Vec3(0.0, 0.0, config.mission.gripper_drop);
            for (std::size_t i = 0; i < objects.size() && !attached; ++i) {
                const WorldObject& obj = objects[i];
                const GripTarget target{obj.pose.translation, obj.width / 2.0, obj.depth / 2.0,
                                        object_yaw(obj), obj.bend_angle_deg, obj.ferrous};
                const GripOutcome out =
                    attempt_grip(grip_point, gripper, circuit, compliance, target);
                if (out.attached) {
                    attached = i;
                    attach_offset = obj.pose.translation - mav.position;
                    grip_outcome = out;
                    attach_time = t;
                    filtered_accel_z = 0.0;
                }
            }
        } else if (cmd.gripper_command == GripperCommand::Off) {
            switch_polarity(gripper, Polarity::Off);
            if (attached) {
                land_object(objects[*attached], mav.velocity);
                released_object = attached;
                attached.reset();
            }
        }

        // Physics: platform, wind, tracker, contact, attachment.
        for (std::size_t i = 0; i < objects.size(); ++i) {
            if (objects[i].carrier == Carrier::Platform && attached != i) {
                objects[i].pose.translation.x() += config.platform_velocity.x() * kDt;
                objects[i].pose.translation.y() += config.platform_velocity.y() * kDt;
            }
        }

        const WindModel& wind = config.wind;
        gust += -gust / wind.correlation_time * kDt +
                wind.gust_amplitude * std::sqrt(2.0 * kDt / wind.correlation_time) * gauss(rng);
        const Vec3 wind_velocity((wind.mean_speed + gust) * wind_dir.x(),
                                 (wind.mean_speed + gust) * wind_dir.y(), 0.0);
        const Vec3 relative = wind_velocity - mav.velocity;
        Vec3 external_force = wind.drag_coefficient * relative.norm() * relative;
        if (attached) {
            external_force.z() -= objects[*attached].mass * kGravity;
        }

        // The flight controller feeds the current force estimate back as
        // extra thrust, so payload weight and mean wind are rejected instead
        // of producing a standing F/(m w^2) offset. The observer stays
        // unbiased because the commanded specific force includes that term.
        const Vec3 estimate_world(observer.force_estimate.x(), observer.force_estimate.y(),
                                  -observer.force_estimate.z());
        const Vec3 applied_force = external_force - estimate_world;

        const Vec3 ref = cmd.pose_reference.translation;
        const double w = mav.natural_frequency;
        const Vec3 commanded_accel = w * w * (ref - mav.position) +
                                     2.0 * mav.damping_ratio * w *
                                         (cmd.velocity_ff - mav.velocity) -
                                     estimate_world / config.mav_mass;
        const Vec3 prev_velocity = mav.velocity;
        tracker_step(mav, ref, cmd.velocity_ff, applied_force, config.mav_mass, kDt);

        // The gripper tip cannot pass through the ground or an object top.
        double floor_z = config.mission.gripper_drop;
        if (!attached) {
            for (const WorldObject& obj : objects) {
                const double cos_yaw = std::cos(object_yaw(obj));
                const double sin_yaw = std::sin(object_yaw(obj));
                const Vec2 d = xy(mav.position) - xy(obj.pose.translation);
                const double lx = cos_yaw * d.x() + sin_yaw * d.y();
                const double ly = -sin_yaw * d.x() + cos_yaw * d.y();
                if (std::abs(lx) <= obj.width / 2.0 && std::abs(ly) <= obj.depth / 2.0) {
                    floor_z = std::max(floor_z,
                                       obj.pose.translation.z() + config.mission.gripper_drop);
                }
            }
        }
        if (mav.position.z() < floor_z) {
            mav.position.z() = floor_z;
            mav.velocity.z() = std::max(mav.velocity.z(), 0.0);
        }

        if (attached) {
            objects[*attached].pose.translation = mav.position + attach_offset;
        }

        const Vec3 actual_accel = (mav.velocity - prev_velocity) / kDt;

        if (attached && t - attach_time > kAttachGrace) {
            filtered_accel_z +=
                (actual_accel.z() - filtered_accel_z) * kDt / kAccelFilterTau;
            const double accel_g = std::max(0.0, filtered_accel_z) / kGravity;
            const HoldResult hold = hold_under_acceleration(
                grip_outcome, compliance, objects[*attached].mass, accel_g);
            if (hold != HoldResult::Holds) {
                land_object(objects[*attached], mav.velocity);
                attached.reset();
                if (config.experiment == ExperimentType::Dynamic) {
                    // Losing the object over a moving platform ends the run.
                    outcome = Outcome::ObjectLostUnrecovered;
                }
            }
        } else if (!attached) {
            filtered_accel_z = 0.0;
        }

        const Vec3 measured_accel =
            actual_accel + measurement_sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
        // The observer works in a z-down load frame so attached weight reads
        // as a positive vertical force.
        const Vec3 measured_load(measured_accel.x(), measured_accel.y(), -measured_accel.z());
        const Vec3 commanded_load(commanded_accel.x(), commanded_accel.y(),
                                  -commanded_accel.z());
        observer_step(observer, measured_load, commanded_load, config.mav_mass, kDt);

        if (config.record_ticks) {
            log.ticks.push_back(TickRecord{t, mav.position, mission.phase,
                                           int(obs.detections.size()),
                                           observer.force_estimate.z(),
                                           gripper.energy_consumed_mwh});
        }
        if (mission.phase != prev_phase || cmd.gripper_command != GripperCommand::None) {
            const Vec2 target_xy =
                mission.target ? xy(mission.target->world_position) : Vec2::Zero();
            log.transitions.push_back(TransitionRecord{t, mission.phase, mission.t_wait,
                                                       mission.pickup_attempts, target_xy,
                                                       cmd.gripper_command});
        }
        prev_phase = mission.phase;

        if (!outcome) {
            if (mission.phase == Phase::Done) {
                const WorldObject& delivered = objects[released_object.value_or(0)];
                const double miss =
                    (xy(delivered.pose.translation) - xy(config.mission.drop_zone)).norm();
                outcome = released_object && miss <= config.drop_radius
                              ? Outcome::Delivered
                              : Outcome::DroppedOutside;
            } else if (mission.phase == Phase::Failed) {
                outcome = Outcome::ObjectLostUnrecovered;
            }
        }
    }

    log.outcome = outcome.value_or(Outcome::Timeout);
    log.pickup_tries = mission.pickup_attempts;
    log.energy_mwh = gripper.energy_consumed_mwh;
    log.duration_s = end_time;
    return log;
}

CampaignResult monte_carlo(const ScenarioConfig& base_config, ExperimentType experiment,
                           int n_runs, std::uint64_t seed) {
    if (n_runs < 1) {
        throw ConfigInvalid("campaign needs at least one run");
    }
    if (base_config.objects.empty()) {
        throw ConfigInvalid("campaign scenario needs an object to pick");
    }

    CampaignResult result;
    result.runs.resize(std::size_t(n_runs));

    auto run_one = [&](int index) {
        std::mt19937_64 placement(derive_seed(seed, index));
        std::uniform_real_distribution<double> uni(0.0, 1.0);

        ScenarioConfig config = base_config;
        config.experiment = experiment;
        config.record_ticks = false;

        // Random placement around the start hover, in one of two yaw
        // configurations (bent objects flip bend up/down instead).
        WorldObject& obj = config.objects.front();
        const double angle = 2.0 * M_PI * uni(placement);
        const double radius = 0.25 + 0.5 * uni(placement);
        obj.pose.translation.x() = config.mav_start.x() + radius * std::cos(angle);
        obj.pose.translation.y() = config.mav_start.y() + radius * std::sin(angle);
        const bool alternate = uni(placement) < 0.5;
        if (obj.bend_angle_deg != 0.0) {
            obj.bend_angle_deg = std::abs(obj.bend_angle_deg) * (alternate ? -1.0 : 1.0);
        } else if (alternate) {
            obj.pose.rotation = Rotation::rot_z(M_PI / 6.0);
        }

        switch (experiment) {
            case ExperimentType::Static:
                config.platform_velocity = Vec2::Zero();
                config.wind.mean_speed = 0.0;
                config.wind.gust_amplitude = 0.0;
                break;
            case ExperimentType::Wind:
                config.platform_velocity = Vec2::Zero();
                config.wind.mean_speed = 4.0 + 11.0 * uni(placement);
                config.wind.gust_amplitude = 0.15 * config.wind.mean_speed;
                config.wind.direction_deg = 360.0 * uni(placement);
                break;
            case ExperimentType::Dynamic: {
                const double heading = 2.0 * M_PI * uni(placement);
                config.platform_velocity =
                    0.1 * Vec2(std::cos(heading), std::sin(heading));
                config.wind.mean_speed = 0.0;
                config.wind.gust_amplitude = 0.0;
                obj.carrier = Carrier::Platform;
                break;
            }
        }
        config.seed = placement();

        const MissionLog log = run_mission(config);
        result.runs[std::size_t(index)] =
            CampaignRun{index,         config.seed,   log.outcome,
                        log.pickup_tries, log.energy_mwh, log.duration_s};
    };

    const unsigned hw = std::thread::hardware_concurrency();
    const int workers = std::max(1, std::min<int>(int(hw), 8));
    if (workers == 1 || n_runs == 1) {
        for (int i = 0; i < n_runs; ++i) {
            run_one(i);
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (int i = next.fetch_add(1); i < n_runs; i = next.fetch_add(1)) {
                    run_one(i);
                }
            });
        }
        for (std::thread& th : pool) {
            th.join();
        }
    }

    result.stats.experiment_type = experiment;
    result.stats.runs = n_runs;
    for (const CampaignRun& run : result.runs) {
        result.stats.successes += run.outcome == Outcome::Delivered ? 1 : 0;
        result.stats.total_pickup_tries += run.pickup_tries;
    }
    result.stats.success_rate = double(result.stats.successes) / double(n_runs);
    return result;
}

}  // namespace aerograsp
