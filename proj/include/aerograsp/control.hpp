#pragma once

#include "aerograsp/errors.hpp"
#include "aerograsp/frames.hpp"

namespace aerograsp {

/// Planar PID that turns an x,y offset into a setpoint shift, with output
/// saturation and conditional-integration anti-windup.
struct PidState {
    double kp = 0.9;
    double ki = 0.15;
    double kd = 0.05;
    double output_saturation = 0.05;  // m per tick, per axis
    double integrator_limit = 0.5;    // m*s, per axis
    Vec2 integrator = Vec2::Zero();   // integral of error, m*s
    Vec2 previous_error = Vec2::Zero();
    bool has_previous_error = false;
};

/// Advances the PID one tick and returns the setpoint shift, clamped per axis
/// to +/- output_saturation. While an axis is saturated in the same sign as
/// its error, that axis's integrator is frozen (checked before integrating, so
/// a saturated stretch leaves the integrator exactly where it started).
Vec2 pid_step(PidState& state, const Vec2& error_xy, double dt);

/// Second-order closed-loop position tracker standing in for the trajectory
/// tracking controller: a critically-damped (by default) servo toward a pose
/// reference, disturbed by external forces.
struct TrackerState {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
    double natural_frequency = 2.5;  // rad/s
    double damping_ratio = 1.0;      // >= 1 keeps steps non-overshooting
};

/// a = w^2 (ref - p) + 2 z w (v_ff - v) + F_ext / mass, integrated
/// semi-implicitly (velocity first, then position). Requires dt in (0, 0.1]
/// and mass > 0.
void tracker_step(TrackerState& state, const Vec3& reference_position,
                  const Vec3& reference_velocity_ff, const Vec3& external_force, double mass,
                  double dt);

/// Kalman observer for external force modeled as a random walk, measured
/// through specific force: z = commanded + force / mass + noise.
/// force_estimate.z uses a positive-down load convention at the call sites
/// that feed it, so an attached object's weight shows up positive.
struct ForceObserverState {
    Vec3 force_estimate = Vec3::Zero();            // N
    Mat3 covariance = Mat3::Identity();            // N^2
    double process_noise = 0.01;                   // N^2/s
    double measurement_noise = 0.05 * 0.05;        // (m/s^2)^2
};

void observer_step(ForceObserverState& state, const Vec3& measured_specific_force,
                   const Vec3& commanded_specific_force, double mass, double dt);

struct GraspParams {
    double force_threshold = 3.0;  // N, must be > 0
};

/// True when the estimated vertical load meets the threshold (>=, so the
/// boundary itself counts as a grasp).
bool grasp_detected(const ForceObserverState& state, const GraspParams& params);

}  // namespace aerograsp
