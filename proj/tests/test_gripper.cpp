#include <doctest.h>

#include <cmath>

#include "aerograsp/gripper.hpp"

using namespace aerograsp;

namespace {

GripTarget flat_plate(double half_width, double mass_unused = 0.0) {
    (void)mass_unused;
    GripTarget t;
    t.top_center = Vec3(0.0, 0.0, 0.004);
    t.half_width = half_width;
    t.half_depth = half_width;
    return t;
}

GripperState energized() {
    GripperState s;
    s.polarity = Polarity::On;
    return s;
}

}  // namespace

TEST_CASE("maxwell attraction follows B^2 A / 2 mu0") {
    const double mu0 = 4.0e-7 * M_PI;
    CHECK(maxwell_force(1.0, 1e-4) == doctest::Approx(1e-4 / (2.0 * mu0)).epsilon(1e-12));
    // Quadratic in flux density, linear in area.
    CHECK(maxwell_force(2.0, 1e-4) == doctest::Approx(4.0 * maxwell_force(1.0, 1e-4)));
    CHECK(maxwell_force(1.0, 3e-4) == doctest::Approx(3.0 * maxwell_force(1.0, 1e-4)));
}

TEST_CASE("calibrated circuit hits its nameplate forces") {
    const MagneticCircuit c = MagneticCircuit::calibrated_default();
    const double on = circuit_force(c, Polarity::On, 0.0);
    // The area calibration is linear, so this is exact to roundoff.
    CHECK(on == doctest::Approx(34.0).epsilon(1e-9));
    CHECK(on / c.cycles == doctest::Approx(17.0).epsilon(1e-9));
    const double off = circuit_force(c, Polarity::Off, 0.0);
    // Opposed magnets cancel up to their remanence mismatch.
    CHECK(off < 0.02 * on);
    CHECK(off > 0.0);
}

TEST_CASE("off-state residual matches the remanence mismatch ratio") {
    // With the magnets opposed the net source scales with B_r difference over
    // the sum, and force is quadratic in flux.
    const MagneticCircuit c = MagneticCircuit::calibrated_default();
    const double mismatch = (c.neodymium.remanence - c.alnico.remanence) /
                            (c.neodymium.remanence + c.alnico.remanence);
    const double ratio = circuit_force(c, Polarity::Off, 0.0) / circuit_force(c, Polarity::On, 0.0);
    CHECK(ratio == doctest::Approx(mismatch * mismatch).epsilon(0.05));
}

TEST_CASE("force decreases strictly with seating gap") {
    const MagneticCircuit c = MagneticCircuit::calibrated_default();
    double prev = circuit_force(c, Polarity::On, 0.0);
    for (double gap = 0.05e-3; gap <= 2.0e-3; gap += 0.05e-3) {
        const double f = circuit_force(c, Polarity::On, gap);
        CHECK(f < prev);
        CHECK(f > 0.0);
        prev = f;
    }
    // A large gap collapses the force to a small fraction.
    CHECK(circuit_force(c, Polarity::On, 2.0e-3) < 0.25 * 34.0);
    CHECK_THROWS_AS(circuit_force(c, Polarity::On, -1e-6), NonPhysical);
}

TEST_CASE("polarity switch books one pulse, no-op is free") {
    GripperState s;
    CHECK(s.energy_consumed_mwh == 0.0);
    switch_polarity(s, Polarity::Off);  // already off
    CHECK(s.energy_consumed_mwh == 0.0);
    switch_polarity(s, Polarity::On);
    const double one = 15.0 * 80.0 * 2.5e-3 / 3.6;  // V*I*t joules to mWh
    CHECK(s.energy_consumed_mwh == doctest::Approx(one).epsilon(1e-12));
    CHECK(one == doctest::Approx(0.8333).epsilon(1e-3));
    switch_polarity(s, Polarity::On);  // no-op
    CHECK(s.energy_consumed_mwh == doctest::Approx(one).epsilon(1e-12));
    switch_polarity(s, Polarity::Off);
    switch_polarity(s, Polarity::On);
    CHECK(s.energy_consumed_mwh == doctest::Approx(3.0 * one).epsilon(1e-12));
}

TEST_CASE("grip seats only under the right conditions") {
    const MagneticCircuit c = MagneticCircuit::calibrated_default();
    const ComplianceModel comp = ComplianceModel::calibrated_default();
    const GripTarget plate = flat_plate(0.0825);

    // Centered, energized, at the surface: attaches with full force.
    const GripOutcome ok =
        attempt_grip(Vec3(0.0, 0.0, 0.004), energized(), c, comp, plate);
    CHECK(ok.attached);
    CHECK(ok.suspension_pitch == doctest::Approx(0.0));
    CHECK(ok.holding_force == doctest::Approx(34.0).epsilon(1e-6));

    // De-energized gripper does not stick.
    CHECK_FALSE(attempt_grip(Vec3(0.0, 0.0, 0.004), GripperState{}, c, comp, plate).attached);

    // Retracted magnets cannot reach the plate.
    GripperState retracted = energized();
    retracted.retracted = true;
    CHECK_FALSE(attempt_grip(Vec3(0.0, 0.0, 0.004), retracted, c, comp, plate).attached);

    // More than 5 mm above the surface.
    CHECK_FALSE(attempt_grip(Vec3(0.0, 0.0, 0.012), energized(), c, comp, plate).attached);

    // Outside the footprint.
    CHECK_FALSE(attempt_grip(Vec3(0.09, 0.0, 0.004), energized(), c, comp, plate).attached);

    // Non-ferrous surface.
    GripTarget wood = plate;
    wood.ferrous = false;
    CHECK_FALSE(attempt_grip(Vec3(0.0, 0.0, 0.004), energized(), c, comp, wood).attached);

    // Bend beyond the conformity envelope.
    GripTarget folded = plate;
    folded.bend_angle_deg = 45.0;
    CHECK_FALSE(attempt_grip(Vec3(0.0, 0.0, 0.004), energized(), c, comp, folded).attached);
    folded.bend_angle_deg = 29.0;
    CHECK(attempt_grip(Vec3(0.0, 0.0, 0.004), energized(), c, comp, folded).attached);
}

TEST_CASE("footprint check respects yaw") {
    const MagneticCircuit c = MagneticCircuit::calibrated_default();
    const ComplianceModel comp = ComplianceModel::calibrated_default();
    GripTarget plank;
    plank.top_center = Vec3(0.0, 0.0, 0.004);
    plank.half_width = 0.2;
    plank.half_depth = 0.02;
    plank.yaw = M_PI / 2.0;  // long axis now along world y
    CHECK(attempt_grip(Vec3(0.0, 0.15, 0.004), energized(), c, comp, plank).attached);
    CHECK_FALSE(attempt_grip(Vec3(0.15, 0.0, 0.004), energized(), c, comp, plank).attached);
}

TEST_CASE("suspension pitch is the offset lever angle") {
    const MagneticCircuit c = MagneticCircuit::calibrated_default();
    const ComplianceModel comp = ComplianceModel::calibrated_default();
    const GripTarget plate = flat_plate(0.0825);
    const double offset = 0.058;  // equal to the pivot height: 45 degrees
    const GripOutcome g =
        attempt_grip(Vec3(offset, 0.0, 0.004), energized(), c, comp, plate);
    REQUIRE(g.attached);
    CHECK(g.suspension_pitch == doctest::Approx(45.0).epsilon(1e-9));
    CHECK(g.contact_offset.x() == doctest::Approx(offset).epsilon(1e-12));
}

TEST_CASE("centered grip holds any reasonable load") {
    const ComplianceModel comp = ComplianceModel::calibrated_default();
    GripOutcome g;
    g.attached = true;
    g.contact_offset = Vec2::Zero();
    g.suspension_pitch = 0.0;
    g.holding_force = 34.0;
    CHECK(hold_under_acceleration(g, comp, 0.87, 1.0) == HoldResult::Holds);
    CHECK(hold_under_acceleration(g, comp, 1.5, 0.8) == HoldResult::Holds);
    g.attached = false;
    CHECK_THROWS_AS(hold_under_acceleration(g, comp, 0.87, 0.0), NotAttached);
}

TEST_CASE("slip boundary sits exactly at the calibration point") {
    // The friction coefficient was solved so a 520 g plate gripped 81 mm off
    // center at 0.8 g extra sits exactly on the slip boundary.
    const ComplianceModel comp = ComplianceModel::calibrated_default();
    const double mu = calibrate_friction(0.52, 0.081, comp.suspension_pivot_height, 0.8, 34.0);
    CHECK(comp.friction_coefficient == doctest::Approx(mu).epsilon(1e-12));

    const double pitch = std::atan(0.081 / comp.suspension_pivot_height) * 180.0 / M_PI;
    const double w = 0.52 * (1.0 + 0.8) * kGravity;
    // On the boundary: shear equals friction capacity to roundoff.
    CHECK(w * std::sin(pitch * M_PI / 180.0) ==
          doctest::Approx(comp.friction_coefficient * 34.0).epsilon(1e-12));
}

TEST_CASE("failure mode ordering over offset: holds, then slip or peel") {
    const MagneticCircuit c = MagneticCircuit::calibrated_default();
    const ComplianceModel comp = ComplianceModel::calibrated_default();
    const GripTarget plate = flat_plate(0.0825);

    auto result_at = [&](double offset, double mass, double accel) {
        GripTarget t = plate;
        const GripOutcome g =
            attempt_grip(Vec3(offset, 0.0, 0.004), energized(), c, comp, t);
        REQUIRE(g.attached);
        return hold_under_acceleration(g, comp, mass, accel);
    };

    // Light plate: holds well past mid-plate, slips near the edge.
    CHECK(result_at(0.0, 0.52, 0.8) == HoldResult::Holds);
    CHECK(result_at(0.060, 0.52, 0.8) == HoldResult::Holds);
    CHECK(result_at(0.0825, 0.52, 0.8) != HoldResult::Holds);

    // A heavy plate at a modest offset fails by peel: below the slip/peel
    // crossover angle the lever arm loads the inner legs first.
    CHECK(result_at(0.008, 1.2, 0.8) == HoldResult::Holds);
    CHECK(result_at(0.025, 1.2, 0.8) == HoldResult::Peel);

    // Zero extra acceleration is easier to hold than 0.8 g everywhere.
    CHECK(result_at(0.060, 0.52, 0.0) == HoldResult::Holds);
}

TEST_CASE("hold margin is monotone in mass and acceleration") {
    const ComplianceModel comp = ComplianceModel::calibrated_default();
    GripOutcome g;
    g.attached = true;
    g.contact_offset = Vec2(0.05, 0.0);
    g.suspension_pitch = std::atan(0.05 / comp.suspension_pivot_height) * 180.0 / M_PI;
    g.holding_force = 34.0;

    // Find the failure mass at fixed acceleration; anything lighter holds,
    // anything heavier fails.
    double failure_mass = -1.0;
    for (double m = 0.1; m <= 3.0; m += 0.01) {
        if (hold_under_acceleration(g, comp, m, 0.8) != HoldResult::Holds) {
            failure_mass = m;
            break;
        }
    }
    REQUIRE(failure_mass > 0.0);
    CHECK(hold_under_acceleration(g, comp, failure_mass - 0.02, 0.8) == HoldResult::Holds);
    CHECK(hold_under_acceleration(g, comp, failure_mass + 0.02, 0.8) != HoldResult::Holds);

    // Same object, increasing acceleration: once it fails it stays failed.
    bool failed = false;
    for (double a = 0.0; a <= 3.0; a += 0.05) {
        const bool fails_now = hold_under_acceleration(g, comp, 1.2, a) != HoldResult::Holds;
        if (failed) CHECK(fails_now);
        failed = failed || fails_now;
    }
    CHECK(failed);
}

TEST_CASE("hold result names") {
    CHECK(std::string(to_string(HoldResult::Holds)) == "holds");
    CHECK(std::string(to_string(HoldResult::Slip)) == "slip");
    CHECK(std::string(to_string(HoldResult::Peel)) == "peel");
}
