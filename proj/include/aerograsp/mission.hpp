#pragma once

#include <optional>
#include <vector>

#include "aerograsp/camera.hpp"
#include "aerograsp/control.hpp"
#include "aerograsp/detect.hpp"
#include "aerograsp/errors.hpp"
#include "aerograsp/frames.hpp"

namespace aerograsp {

enum class Phase {
    Localize,
    Align,
    Descend,
    FinalApproach,
    AscendWithObject,
    Transport,
    Drop,
    RecoverRelocalize,
    RecoverReturnToLoss,
    Done,
    Failed
};

const char* to_string(Phase phase);

enum class GripperCommand { None, On, Off };

const char* to_string(GripperCommand cmd);

struct MissionParams {
    double operation_height = 2.0;   // m above the object, detection/travel altitude
    double hover_height = 0.7;       // m above the object, staging altitude
    double align_radius = 0.15;      // m, the epsilon gate
    double wait_threshold = 1.0;     // s the MAV must dwell inside the gate
    Vec3 drop_zone = Vec3(3.0, 3.0, 0.0);
    double drop_hover_height = 1.0;  // m above the drop zone
    double drop_hover_time = 1.0;    // s settled over the zone before release
    GraspParams grasp;
    int max_pickup_attempts = 3;
    double descent_rate = 0.5;        // m/s, operation height -> hover height
    double final_descent_rate = 0.4;  // m/s, open-loop final approach
    double ascent_rate = 1.0;         // m/s
    double transport_speed = 1.0;     // m/s horizontal cruise
    double gripper_drop = 0.25;       // m, gripper contact point below MAV origin
    double contact_tolerance = 0.004; // m, seat detection window
    double verify_hold_time = 0.5;    // s at operation height before the grasp check
    double target_lost_timeout = 0.7; // s without a matching detection
    double target_gate_radius = 0.5;  // m, detection-to-lock association gate
    bool sphere_check_3d = true;      // hover gate as a 3-D sphere vs horizontal only
};

/// A color detection mapped into the world frame (CoG on the object's top plane).
struct LocalizedDetection {
    ObjectClass color_class = ObjectClass::Red;
    Vec3 world_position = Vec3::Zero();
    double area_fraction = 0.0;
};

/// Maps pixel detections to world positions: pixel ray through the fisheye
/// model, rotated by mount and attitude, intersected with the support plane.
struct TargetLocalizer {
    CameraIntrinsics intrinsics = CameraIntrinsics::synthetic_default();
    ExtrinsicCalibration extrinsics = ExtrinsicCalibration::down_looking();
    double support_plane_z = 0.0;  // world z of the surface objects rest on

    LocalizedDetection localize(const RigidTransform& mav_pose,
                                const DetectedObject& detection) const;
};

/// Localizes every detection and returns the one closest to the MAV in
/// Euclidean x,y distance; ties go to the earlier list entry. Detections whose
/// rays miss the support plane are skipped.
std::optional<LocalizedDetection> select_target(const std::vector<DetectedObject>& detections,
                                                const RigidTransform& mav_pose,
                                                const TargetLocalizer& localizer);

/// Same selection over already-localized detections.
std::optional<LocalizedDetection> nearest_detection(
    const std::vector<LocalizedDetection>& detections, const Vec2& mav_xy);

/// Everything the state machine consumes in one tick. Detections arrive
/// already localized; the velocity estimate comes from the perception
/// front-end's history of those localizations, never from ground truth.
struct Observations {
    std::vector<LocalizedDetection> detections;
    RigidTransform mav_pose = RigidTransform::identity();
    Vec3 mav_velocity = Vec3::Zero();
    bool grasp_flag = false;
    Vec2 object_xy_velocity_estimate = Vec2::Zero();
};

struct MissionState {
    Phase phase = Phase::Localize;
    double t_wait = 0.0;  // dwell timer inside the align gate
    std::optional<LocalizedDetection> target;
    std::optional<Vec3> loss_location;
    int pickup_attempts = 0;

    // Controller internals.
    PidState pid;
    Vec3 reference = Vec3::Zero();  // persisted pose reference
    bool reference_valid = false;
    double base_z = 0.0;  // support-plane height of the locked target
    Vec2 final_ff = Vec2::Zero();
    double time_since_target_seen = 0.0;
    double gate_timer = 0.0;  // dwell timer for non-align gates
    bool on_latched = false;
    bool off_latched = false;
};

struct MissionCommand {
    RigidTransform pose_reference = RigidTransform::identity();
    Vec3 velocity_ff = Vec3::Zero();
    GripperCommand gripper_command = GripperCommand::None;
};

/// One 100 Hz tick of the mission state machine. Deterministic; all timing is
/// accumulated from dt. Terminal phases (Done, Failed) hold position forever.
MissionCommand mission_step(MissionState& state, const MissionParams& params,
                            const Observations& obs, double dt);

}  // namespace aerograsp
