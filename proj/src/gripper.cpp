#include "aerograsp/gripper.hpp"

#include <cmath>

namespace aerograsp {

namespace {

constexpr double kMu0 = 4e-7 * M_PI;
// Lumped steel path (yoke plus both legs); a few percent of the gap
// reluctance, kept for gap-sensitivity fidelity.
constexpr double kIronPathLength = 0.06;

double gap_reluctance(double gap, double area) { return gap / (kMu0 * area); }

struct Branch {
    double mmf;        // A
    double reluctance; // 1/H
};

Branch magnet_branch(const MagnetMaterial& m, double sign, double length, double area) {
    const double hc = m.intrinsic_coercivity * 1000.0; // kA/m -> A/m
    const double mu_recoil = m.remanence / (kMu0 * hc);
    return Branch{sign * hc * length, length / (mu_recoil * kMu0 * area)};
}

void validate(const MagneticCircuit& c, double extra_gap) {
    const bool ok = c.alnico.remanence > 0.0 && c.alnico.intrinsic_coercivity > 0.0 &&
                    c.neodymium.remanence > 0.0 && c.neodymium.intrinsic_coercivity > 0.0 &&
                    c.magnet_length > 0.0 && c.magnet_area > 0.0 && c.leg_contact_area > 0.0 &&
                    c.internal_gap_magnet_iron > 0.0 && c.internal_gap_leg_iron > 0.0 &&
                    c.contact_gap > 0.0 && c.iron_relative_permeability > 0.0 &&
                    c.cycles > 0 && extra_gap >= 0.0;
    if (!ok) {
        throw NonPhysical("magnetic circuit has a non-positive reluctance parameter");
    }
}

}  // namespace

double maxwell_force(double flux_density, double area) {
    return flux_density * flux_density * area / (2.0 * kMu0);
}

double circuit_force(const MagneticCircuit& circuit, Polarity polarity, double extra_gap) {
    validate(circuit, extra_gap);
    // The switchable Alnico opposes the fixed Neodymium in the off state.
    const double alnico_sign = polarity == Polarity::On ? 1.0 : -1.0;
    const Branch a = magnet_branch(circuit.alnico, alnico_sign, circuit.magnet_length,
                                   circuit.magnet_area);
    const Branch n = magnet_branch(circuit.neodymium, 1.0, circuit.magnet_length,
                                   circuit.magnet_area);

    // Thevenin equivalent of the two parallel magnet branches. With recoil
    // permeability B_r / (mu0 H_c), each branch sources B_r * area, so the
    // off-state residual is the remanence difference, not skewed by the very
    // different recoil slopes.
    const double admittance = 1.0 / a.reluctance + 1.0 / n.reluctance;
    const double mmf_th = (a.mmf / a.reluctance + n.mmf / n.reluctance) / admittance;
    const double r_th = 1.0 / admittance;

    // Both magnets are bonded between common pole pieces; the combined flux
    // crosses one joint per pole over the stack footprint (both magnet areas).
    const double r_pole_joints =
        2.0 * gap_reluctance(circuit.internal_gap_magnet_iron, 2.0 * circuit.magnet_area);
    const double r_external =
        r_pole_joints +
        2.0 * (gap_reluctance(circuit.internal_gap_leg_iron, circuit.leg_contact_area) +
               gap_reluctance(circuit.contact_gap + extra_gap, circuit.leg_contact_area)) +
        kIronPathLength / (circuit.iron_relative_permeability * kMu0 * circuit.leg_contact_area);

    const double flux = mmf_th / (r_th + r_external);
    const double b = std::abs(flux) / circuit.leg_contact_area;
    return circuit.cycles * 2.0 * maxwell_force(b, circuit.leg_contact_area);
}

MagneticCircuit MagneticCircuit::calibrated_default() {
    MagneticCircuit base;
    // All reluctances scale as 1/area, so scaling both areas together leaves
    // the gap flux density unchanged and makes the force exactly linear in
    // the scale: one division lands the design force exactly.
    const double design_force = 17.0 * base.cycles;
    const double scale = design_force / circuit_force(base, Polarity::On, 0.0);
    base.magnet_area *= scale;
    base.leg_contact_area *= scale;
    return base;
}

void switch_polarity(GripperState& state, Polarity target) {
    if (state.polarity != target) {
        const double joules =
            state.pulse_voltage * state.pulse_current * (state.pulse_duration * 1e-3);
        state.energy_consumed_mwh += joules / 3.6; // 3.6 J per mWh
    }
    state.polarity = target;
}

GripOutcome attempt_grip(const Vec3& gripper_position, const GripperState& state,
                         const MagneticCircuit& circuit, const ComplianceModel& compliance,
                         const GripTarget& target) {
    GripOutcome out;
    out.contact_offset = Vec2(gripper_position.x() - target.top_center.x(),
                              gripper_position.y() - target.top_center.y());
    if (state.polarity != Polarity::On || state.retracted || !target.ferrous) {
        return out;
    }
    if (std::abs(target.bend_angle_deg) > compliance.max_pitch_roll) {
        return out;
    }
    if (std::abs(gripper_position.z() - target.top_center.z()) > 0.005) {
        return out;
    }
    const double cos_yaw = std::cos(target.yaw);
    const double sin_yaw = std::sin(target.yaw);
    const double local_x = cos_yaw * out.contact_offset.x() + sin_yaw * out.contact_offset.y();
    const double local_y = -sin_yaw * out.contact_offset.x() + cos_yaw * out.contact_offset.y();
    if (std::abs(local_x) > target.half_width || std::abs(local_y) > target.half_depth) {
        return out;
    }
    out.attached = true;
    out.suspension_pitch =
        std::atan(out.contact_offset.norm() / compliance.suspension_pivot_height) * 180.0 / M_PI;
    out.holding_force = circuit_force(circuit, Polarity::On, 0.0);
    return out;
}

const char* to_string(HoldResult result) {
    switch (result) {
        case HoldResult::Holds: return "holds";
        case HoldResult::Slip: return "slip";
        case HoldResult::Peel: return "peel";
    }
    return "unknown";
}

HoldResult hold_under_acceleration(const GripOutcome& outcome, const ComplianceModel& compliance,
                                   double object_mass, double vertical_accel) {
    if (!outcome.attached) {
        throw NotAttached("hold check requires an attached grip");
    }
    const double load = object_mass * (1.0 + vertical_accel) * kGravity;
    const double pitch = outcome.suspension_pitch * M_PI / 180.0;

    // Tilted suspension turns load into shear at the contacts.
    const double slip_ratio =
        load * std::sin(pitch) / (compliance.friction_coefficient * outcome.holding_force);

    // Moment balance about the outer contact line: the hanging load pulls
    // normal to the tilted contact plane with lever arm offset + spacing/2,
    // against the inner leg pair holding half the attraction.
    const double offset = outcome.contact_offset.norm();
    const double inner_load =
        load * std::cos(pitch) * (0.5 + offset / compliance.leg_spacing);
    const double peel_ratio = inner_load / (0.5 * outcome.holding_force);

    if (slip_ratio <= 1.0 && peel_ratio <= 1.0) {
        return HoldResult::Holds;
    }
    return slip_ratio >= peel_ratio ? HoldResult::Slip : HoldResult::Peel;
}

double calibrate_friction(double object_mass, double offset, double pivot_height,
                          double vertical_accel, double holding_force) {
    const double load = object_mass * (1.0 + vertical_accel) * kGravity;
    const double pitch = std::atan(offset / pivot_height);
    return load * std::sin(pitch) / holding_force;
}

ComplianceModel ComplianceModel::calibrated_default() {
    ComplianceModel model;
    const double design_force =
        circuit_force(MagneticCircuit::calibrated_default(), Polarity::On, 0.0);
    model.friction_coefficient =
        calibrate_friction(0.52, 0.081, model.suspension_pivot_height, 0.8, design_force);
    return model;
}

}  // namespace aerograsp
