#include "aerograsp/mission.hpp"

#include <algorithm>
#include <cmath>

namespace aerograsp {

const char* to_string(Phase phase) {
    switch (phase) {
        case Phase::Localize: return "Localize";
        case Phase::Align: return "Align";
        case Phase::Descend: return "Descend";
        case Phase::FinalApproach: return "FinalApproach";
        case Phase::AscendWithObject: return "AscendWithObject";
        case Phase::Transport: return "Transport";
        case Phase::Drop: return "Drop";
        case Phase::RecoverRelocalize: return "RecoverRelocalize";
        case Phase::RecoverReturnToLoss: return "RecoverReturnToLoss";
        case Phase::Done: return "Done";
        case Phase::Failed: return "Failed";
    }
    return "unknown";
}

const char* to_string(GripperCommand cmd) {
    switch (cmd) {
        case GripperCommand::None: return "none";
        case GripperCommand::On: return "on";
        case GripperCommand::Off: return "off";
    }
    return "unknown";
}

LocalizedDetection TargetLocalizer::localize(const RigidTransform& mav_pose,
                                             const DetectedObject& detection) const {
    const Bearing bearing = pixel_to_bearing(intrinsics, detection.centroid_px);
    const Vec3 camera_world_offset =
        mav_pose.rotation * extrinsics.translation_mav_to_camera;
    const double camera_height =
        mav_pose.translation.z() + camera_world_offset.z() - support_plane_z;
    const Vec3 w_dir = bearing_to_world(mav_pose.rotation, extrinsics, bearing);
    const Vec3 camera_to_object = ray_ground_intersect(w_dir, camera_height);

    LocalizedDetection out;
    out.color_class = detection.color_class;
    out.world_position = mav_pose.translation + camera_world_offset + camera_to_object;
    out.area_fraction = detection.area_fraction;
    return out;
}

std::optional<LocalizedDetection> select_target(const std::vector<DetectedObject>& detections,
                                                const RigidTransform& mav_pose,
                                                const TargetLocalizer& localizer) {
    std::vector<LocalizedDetection> localized;
    localized.reserve(detections.size());
    for (const DetectedObject& det : detections) {
        try {
            localized.push_back(localizer.localize(mav_pose, det));
        } catch (const Error&) {
            // Rays that miss the support plane carry no target candidate.
        }
    }
    return nearest_detection(localized,
                             Vec2(mav_pose.translation.x(), mav_pose.translation.y()));
}

std::optional<LocalizedDetection> nearest_detection(
    const std::vector<LocalizedDetection>& detections, const Vec2& mav_xy) {
    std::optional<LocalizedDetection> best;
    double best_dist = 0.0;
    for (const LocalizedDetection& det : detections) {
        const double dist =
            (Vec2(det.world_position.x(), det.world_position.y()) - mav_xy).norm();
        if (!best || dist < best_dist) {
            best = det;
            best_dist = dist;
        }
    }
    return best;
}

namespace {

Vec2 xy(const Vec3& v) { return Vec2(v.x(), v.y()); }

/// Moves the reference one rate-limited step toward a goal point.
Vec2 advance_toward(const Vec2& from, const Vec2& to, double speed, double dt) {
    const Vec2 delta = to - from;
    const double dist = delta.norm();
    const double step = speed * dt;
    if (dist <= step) {
        return to;
    }
    return from + delta * (step / dist);
}

double ramp_toward(double from, double to, double rate, double dt) {
    const double step = rate * dt;
    if (std::abs(to - from) <= step) {
        return to;
    }
    return from + (to > from ? step : -step);
}

}  // namespace

MissionCommand mission_step(MissionState& state, const MissionParams& params,
                            const Observations& obs, double dt) {
    if (!(dt > 0.0)) {
        throw Error("mission_step requires dt > 0");
    }
    const Vec3 mav = obs.mav_pose.translation;
    if (!state.reference_valid) {
        state.reference = mav;
        state.reference_valid = true;
    }

    // Re-associate the locked target with the freshest matching detection.
    if (state.target) {
        const LocalizedDetection* match = nullptr;
        double best_dist = params.target_gate_radius;
        for (const LocalizedDetection& det : obs.detections) {
            if (det.color_class != state.target->color_class) {
                continue;
            }
            const double dist =
                (xy(det.world_position) - xy(state.target->world_position)).norm();
            if (dist <= best_dist) {
                best_dist = dist;
                match = &det;
            }
        }
        if (match) {
            state.target = *match;
            state.time_since_target_seen = 0.0;
        } else {
            state.time_since_target_seen += dt;
        }
    }

    MissionCommand cmd;
    const bool target_lost = state.time_since_target_seen > params.target_lost_timeout;

    switch (state.phase) {
        case Phase::Localize: {
            state.reference.z() =
                ramp_toward(state.reference.z(), state.base_z + params.operation_height,
                            params.ascent_rate, dt);
            const auto selected = nearest_detection(obs.detections, xy(mav));
            if (selected) {
                state.target = selected;
                state.base_z = selected->world_position.z();
                state.pid = PidState{state.pid.kp, state.pid.ki, state.pid.kd,
                                     state.pid.output_saturation, state.pid.integrator_limit};
                state.t_wait = 0.0;
                state.time_since_target_seen = 0.0;
                state.phase = Phase::Align;
            }
            break;
        }

        case Phase::Align: {
            if (target_lost) {
                state.t_wait = 0.0;
                state.phase = Phase::RecoverRelocalize;
                break;
            }
            const Vec2 error = xy(state.target->world_position) - xy(mav);
            // The shift leans the setpoint off the vehicle toward the target;
            // the integrator grows it into a standing trim against wind.
            const Vec2 shift = pid_step(state.pid, error, dt);
            state.reference.x() = mav.x() + shift.x();
            state.reference.y() = mav.y() + shift.y();
            state.reference.z() = ramp_toward(
                state.reference.z(), state.target->world_position.z() + params.operation_height,
                params.ascent_rate, dt);
            if (error.norm() < params.align_radius) {
                state.t_wait += dt;
            } else {
                state.t_wait = 0.0;
            }
            if (state.t_wait > params.wait_threshold) {
                state.t_wait = 0.0;
                state.phase = Phase::Descend;
            }
            break;
        }

        case Phase::Descend: {
            if (target_lost) {
                state.phase = Phase::RecoverRelocalize;
                break;
            }
            const Vec2 error = xy(state.target->world_position) - xy(mav);
            const Vec2 shift = pid_step(state.pid, error, dt);
            state.reference.x() = mav.x() + shift.x();
            state.reference.y() = mav.y() + shift.y();
            const double hover_z = state.target->world_position.z() + params.hover_height;
            state.reference.z() =
                ramp_toward(state.reference.z(), hover_z, params.descent_rate, dt);
            cmd.velocity_ff.z() = state.reference.z() > hover_z ? -params.descent_rate : 0.0;

            if (mav.z() <= hover_z + 0.02) {
                const Vec3 gate_center =
                    state.target->world_position + Vec3(0.0, 0.0, params.hover_height);
                const double gate_err = params.sphere_check_3d
                                            ? (mav - gate_center).norm()
                                            : (xy(mav) - xy(gate_center)).norm();
                if (gate_err <= params.align_radius) {
                    state.pickup_attempts += 1;
                    state.final_ff = obs.object_xy_velocity_estimate;
                    // Freeze the reference on the target plus the standing
                    // integrator trim; the proportional lean is transient and
                    // would carry its error into the open-loop descent.
                    const Vec2 trim = state.pid.ki * state.pid.integrator;
                    state.reference.x() = state.target->world_position.x() + trim.x();
                    state.reference.y() = state.target->world_position.y() + trim.y();
                    state.on_latched = false;
                    state.phase = Phase::FinalApproach;
                } else {
                    state.t_wait = 0.0;
                    state.phase = Phase::Align;
                }
            }
            break;
        }

        case Phase::FinalApproach: {
            if (target_lost) {
                state.phase = Phase::RecoverRelocalize;
                break;
            }
            // Open-loop descent: the stored feed-forward carries the target's
            // motion, vision is no longer trusted this close.
            state.reference.x() += state.final_ff.x() * dt;
            state.reference.y() += state.final_ff.y() * dt;
            const double seat_z = state.target->world_position.z() + params.gripper_drop;
            state.reference.z() = ramp_toward(state.reference.z(), seat_z - 0.003,
                                              params.final_descent_rate, dt);
            cmd.velocity_ff = Vec3(state.final_ff.x(), state.final_ff.y(),
                                   state.reference.z() > seat_z ? -params.final_descent_rate
                                                                : 0.0);
            if (!state.on_latched && mav.z() <= seat_z + params.contact_tolerance) {
                state.on_latched = true;
                cmd.gripper_command = GripperCommand::On;
                state.gate_timer = 0.0;
                state.phase = Phase::AscendWithObject;
            }
            break;
        }

        case Phase::AscendWithObject: {
            const double top_z =
                state.target->world_position.z() + params.operation_height;
            state.reference.z() =
                ramp_toward(state.reference.z(), top_z, params.ascent_rate, dt);
            cmd.velocity_ff.z() = state.reference.z() < top_z ? params.ascent_rate : 0.0;
            if (mav.z() >= top_z - 0.02) {
                state.gate_timer += dt;
                // Hold at altitude until the force observer has settled.
                if (state.gate_timer > params.verify_hold_time) {
                    if (obs.grasp_flag) {
                        state.phase = Phase::Transport;
                    } else {
                        cmd.gripper_command = GripperCommand::Off;
                        state.target.reset();
                        state.time_since_target_seen = 0.0;
                        state.phase = state.pickup_attempts >= params.max_pickup_attempts
                                          ? Phase::Failed
                                          : Phase::Localize;
                    }
                    state.gate_timer = 0.0;
                }
            }
            break;
        }

        case Phase::Transport: {
            if (!obs.grasp_flag) {
                state.loss_location = mav;
                state.phase = Phase::RecoverReturnToLoss;
                break;
            }
            const Vec2 goal = xy(params.drop_zone);
            const Vec2 next = advance_toward(xy(state.reference), goal,
                                             params.transport_speed, dt);
            state.reference.x() = next.x();
            state.reference.y() = next.y();
            state.reference.z() =
                ramp_toward(state.reference.z(), params.drop_zone.z() + params.operation_height,
                            params.ascent_rate, dt);
            if ((xy(mav) - goal).norm() <= params.align_radius) {
                state.off_latched = false;
                state.gate_timer = 0.0;
                state.phase = Phase::Drop;
            }
            break;
        }

        case Phase::Drop: {
            if (!state.off_latched && !obs.grasp_flag) {
                state.loss_location = mav;
                state.phase = Phase::RecoverReturnToLoss;
                break;
            }
            const double hover_z = params.drop_zone.z() + params.drop_hover_height;
            const Vec2 next = advance_toward(xy(state.reference), xy(params.drop_zone),
                                             params.transport_speed, dt);
            state.reference.x() = next.x();
            state.reference.y() = next.y();
            state.reference.z() =
                ramp_toward(state.reference.z(), hover_z, params.descent_rate, dt);

            const bool settled = (xy(mav) - xy(params.drop_zone)).norm() <=
                                     params.align_radius &&
                                 std::abs(mav.z() - hover_z) <= 0.05;
            if (!state.off_latched) {
                state.gate_timer = settled ? state.gate_timer + dt : 0.0;
                if (state.gate_timer > params.drop_hover_time) {
                    state.off_latched = true;
                    cmd.gripper_command = GripperCommand::Off;
                    state.phase = Phase::Done;
                }
            }
            break;
        }

        case Phase::RecoverRelocalize: {
            // Climb back to the operation height; the wide field of view up
            // there re-acquires the object via a fresh Localize pass.
            const double top_z = state.base_z + params.operation_height;
            state.reference.z() =
                ramp_toward(state.reference.z(), top_z, params.ascent_rate, dt);
            if (mav.z() >= top_z - 0.05) {
                state.target.reset();
                state.time_since_target_seen = 0.0;
                state.phase = Phase::Localize;
            }
            break;
        }

        case Phase::RecoverReturnToLoss: {
            const Vec2 goal = xy(*state.loss_location);
            const Vec2 next =
                advance_toward(xy(state.reference), goal, params.transport_speed, dt);
            state.reference.x() = next.x();
            state.reference.y() = next.y();
            state.reference.z() =
                ramp_toward(state.reference.z(), state.base_z + params.operation_height,
                            params.ascent_rate, dt);
            if ((xy(mav) - goal).norm() <= params.align_radius) {
                state.target.reset();
                state.time_since_target_seen = 0.0;
                state.phase = Phase::Localize;
            }
            break;
        }

        case Phase::Done:
        case Phase::Failed:
            break;
    }

    cmd.pose_reference = RigidTransform{Rotation::identity(), state.reference};
    return cmd;
}

}  // namespace aerograsp
