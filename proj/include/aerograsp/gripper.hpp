#pragma once

#include "aerograsp/errors.hpp"
#include "aerograsp/frames.hpp"

namespace aerograsp {

struct MagnetMaterial {
    double remanence = 0.0;            // Tesla
    double intrinsic_coercivity = 0.0; // kA/m
};

enum class Polarity { On, Off };

/// Lumped reluctance network of the electro-permanent magnet: a switchable
/// Alnico bar and a fixed Neodymium bar in parallel drive flux through the
/// iron yoke, two leg contacts, and the gripped object. Two such cycles share
/// the four contact legs.
struct MagneticCircuit {
    MagnetMaterial alnico{1.25, 48.0};     // Grade 5 Alnico
    MagnetMaterial neodymium{1.36, 836.0}; // Grade N45
    double magnet_length = 0.005;          // m
    double magnet_area = 1e-4;             // m^2
    double leg_contact_area = 1e-4;        // m^2
    double internal_gap_magnet_iron = 50e-6; // m, magnet-stack to pole piece, per pole
    double internal_gap_leg_iron = 25e-6;    // m, per leg
    double contact_gap = 100e-6;             // m, leg to object, per leg
    double iron_relative_permeability = 4000.0;
    int cycles = 2;

    /// Geometry with one global area scale calibrated once so the ON force at
    /// nominal gaps is exactly 17 N per cycle (34 N total). The network force
    /// is linear in that scale, so the calibration is exact.
    static MagneticCircuit calibrated_default();
};

/// Maxwell stress attraction across one contact face.
double maxwell_force(double flux_density, double area);

/// Total attraction force over all contacts of all cycles. extra_gap models
/// imperfect seating and is added to the leg-object contact gap.
double circuit_force(const MagneticCircuit& circuit, Polarity polarity, double extra_gap);

struct GripperState {
    Polarity polarity = Polarity::Off;
    double energy_consumed_mwh = 0.0;
    bool retracted = false;
    double pulse_voltage = 15.0;   // V
    double pulse_current = 80.0;   // A
    double pulse_duration = 2.5;   // ms
};

/// Sets the polarity; a real change books one V*I*t pulse into the energy
/// ledger (3.0 J = 0.8333 mWh at defaults), a no-op switch is free.
void switch_polarity(GripperState& state, Polarity target);

/// Passive-compliance parameters of the leg suspension.
struct ComplianceModel {
    double suspension_pivot_height = 0.058; // m
    double leg_spacing = 0.040;             // m, inner to outer contact line
    double friction_coefficient = 0.2195;   // see calibrated_default
    double max_pitch_roll = 30.0;           // degrees, conformity envelope

    /// Same geometry with the friction coefficient solved so the 520 g bent
    /// plate at 0.8 g sits exactly on its slip boundary at 81 mm offset.
    static ComplianceModel calibrated_default();
};

constexpr double kGravity = 9.81;  // m/s^2

/// What the gripper can seat on: the object's top face as the world sees it.
struct GripTarget {
    Vec3 top_center = Vec3::Zero(); // CoG projected to the top surface, world
    double half_width = 0.0;        // footprint half extents, m
    double half_depth = 0.0;
    double yaw = 0.0;               // footprint orientation, rad
    double bend_angle_deg = 0.0;    // 0 = flat plate
    bool ferrous = true;
};

struct GripOutcome {
    bool attached = false;
    Vec2 contact_offset = Vec2::Zero(); // grip point minus object CoG, world x,y, m
    double suspension_pitch = 0.0;      // degrees, at lift
    double holding_force = 0.0;         // N
};

/// Seats the gripper at its current position onto the target. Fails softly
/// (attached = false) when the polarity is off, the gripper is retracted or
/// more than 5 mm from the top surface, the grip point is outside the
/// footprint, the surface is not ferrous, or the bend exceeds the conformity
/// envelope. On success the suspension pitch at lift is
/// atan(|offset| / pivot_height) and the holding force is the seated-gap
/// circuit force.
GripOutcome attempt_grip(const Vec3& gripper_position, const GripperState& state,
                         const MagneticCircuit& circuit, const ComplianceModel& compliance,
                         const GripTarget& target);

enum class HoldResult { Holds, Slip, Peel };

const char* to_string(HoldResult result);

/// Offset-grip failure check at lift. The tilted suspension converts the load
/// W = m (1 + a) g into shear at the contacts (slip when W sin(pitch) exceeds
/// friction) and levers extra load onto the inner leg pair (peel when the
/// moment balance about the outer contact line exceeds that pair's share of
/// the attraction). When both trip, the larger violation ratio is reported.
/// vertical_accel is in g-units above hover. Throws NotAttached.
HoldResult hold_under_acceleration(const GripOutcome& outcome, const ComplianceModel& compliance,
                                   double object_mass, double vertical_accel);

/// Friction coefficient that places the slip boundary of a reference object
/// (mass, grip offset, acceleration) exactly at the given holding force.
double calibrate_friction(double object_mass, double offset, double pivot_height,
                          double vertical_accel, double holding_force);

}  // namespace aerograsp
