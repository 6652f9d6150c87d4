#include "aerograsp/control.hpp"

#include <algorithm>
#include <cmath>

namespace aerograsp {

Vec2 pid_step(PidState& state, const Vec2& error_xy, double dt) {
    if (!(dt > 0.0)) {
        throw Error("pid_step requires dt > 0");
    }
    const Vec2 derivative =
        state.has_previous_error ? Vec2((error_xy - state.previous_error) / dt) : Vec2::Zero();
    state.previous_error = error_xy;
    state.has_previous_error = true;

    Vec2 delta;
    for (int axis = 0; axis < 2; ++axis) {
        const double e = error_xy[axis];
        const double raw = state.kp * e + state.ki * state.integrator[axis] +
                           state.kd * derivative[axis];
        const bool windup = (raw > state.output_saturation && e > 0.0) ||
                            (raw < -state.output_saturation && e < 0.0);
        if (!windup) {
            state.integrator[axis] = std::clamp(state.integrator[axis] + e * dt,
                                                -state.integrator_limit, state.integrator_limit);
        }
        const double out = state.kp * e + state.ki * state.integrator[axis] +
                           state.kd * derivative[axis];
        delta[axis] = std::clamp(out, -state.output_saturation, state.output_saturation);
    }
    return delta;
}

void tracker_step(TrackerState& state, const Vec3& reference_position,
                  const Vec3& reference_velocity_ff, const Vec3& external_force, double mass,
                  double dt) {
    if (!(dt > 0.0) || dt > 0.1) {
        throw Error("tracker_step requires dt in (0, 0.1]");
    }
    if (!(mass > 0.0)) {
        throw Error("tracker_step requires mass > 0");
    }
    const double w = state.natural_frequency;
    const Vec3 accel = w * w * (reference_position - state.position) +
                       2.0 * state.damping_ratio * w * (reference_velocity_ff - state.velocity) +
                       external_force / mass;
    state.velocity += accel * dt;
    state.position += state.velocity * dt;
}

void observer_step(ForceObserverState& state, const Vec3& measured_specific_force,
                   const Vec3& commanded_specific_force, double mass, double dt) {
    if (!(dt > 0.0)) {
        throw Error("observer_step requires dt > 0");
    }
    if (!(mass > 0.0)) {
        throw Error("observer_step requires mass > 0");
    }
    // Predict: random-walk force, x_{k+1} = x_k, P += q dt.
    Mat3 p = state.covariance + state.process_noise * dt * Mat3::Identity();

    // Update with z = commanded + x/m + v, so H = I/m.
    const double inv_m = 1.0 / mass;
    const Vec3 innovation =
        measured_specific_force - commanded_specific_force - state.force_estimate * inv_m;
    const Mat3 s = p * (inv_m * inv_m) + state.measurement_noise * Mat3::Identity();
    const Mat3 gain = p * inv_m * s.inverse();
    state.force_estimate += gain * innovation;

    // Joseph form keeps the covariance PSD under roundoff.
    const Mat3 ikh = Mat3::Identity() - gain * inv_m;
    p = ikh * p * ikh.transpose() +
        gain * (state.measurement_noise * Mat3::Identity()) * gain.transpose();
    state.covariance = 0.5 * (p + p.transpose());
}

bool grasp_detected(const ForceObserverState& state, const GraspParams& params) {
    return state.force_estimate.z() >= params.force_threshold;
}

}  // namespace aerograsp
