#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "aerograsp/camera.hpp"

using namespace aerograsp;

namespace {

/// Straight polynomial evaluation, independent of the Horner form inside the
/// library.
double distortion_poly(const CameraIntrinsics& cam, double theta) {
    const double t2 = theta * theta;
    return theta * (1.0 + cam.distortion[0] * t2 + cam.distortion[1] * t2 * t2 +
                    cam.distortion[2] * t2 * t2 * t2 + cam.distortion[3] * t2 * t2 * t2 * t2);
}

CameraIntrinsics zero_distortion_camera() {
    return CameraIntrinsics::make(640, 480, 300.0, 300.0, 319.5, 239.5, {0.0, 0.0, 0.0, 0.0});
}

WorldSnapshot random_scene(std::mt19937_64& rng, int n_rects) {
    std::uniform_real_distribution<double> pos(-2.0, 2.0);
    std::uniform_real_distribution<double> size(0.05, 0.6);
    std::uniform_real_distribution<double> yaw(-M_PI, M_PI);
    std::uniform_int_distribution<int> channel(0, 255);
    WorldSnapshot world;
    for (int i = 0; i < n_rects; ++i) {
        world.surfaces.push_back(SurfaceRect{
            pos(rng), pos(rng), size(rng), size(rng), yaw(rng), 0.01 + 0.2 * size(rng),
            Rgb{std::uint8_t(channel(rng)), std::uint8_t(channel(rng)),
                std::uint8_t(channel(rng))}});
    }
    return world;
}

}  // namespace

TEST_CASE("distortion polynomial and its inverse") {
    const CameraIntrinsics cam = CameraIntrinsics::synthetic_default();
    for (double theta = 0.0; theta <= 1.4; theta += 0.01) {
        const double d = cam.distort_angle(theta);
        CHECK(d == doctest::Approx(distortion_poly(cam, theta)).epsilon(1e-14));
        CHECK(cam.undistort_angle(d) == doctest::Approx(theta).epsilon(1e-11));
    }
}

TEST_CASE("intrinsics validation") {
    CHECK_NOTHROW(CameraIntrinsics::synthetic_default());
    // Strongly negative leading coefficient folds the projection back on
    // itself inside 100 degrees.
    CHECK_THROWS_AS(
        CameraIntrinsics::make(640, 480, 300.0, 300.0, 319.5, 239.5, {-0.5, 0.0, 0.0, 0.0}),
        Error);
    // A very short focal length pushes the corner rays past 90 degrees.
    CHECK_THROWS_AS(
        CameraIntrinsics::make(640, 480, 150.0, 150.0, 319.5, 239.5, {0.0, 0.0, 0.0, 0.0}),
        Error);
    CHECK_THROWS_AS(
        CameraIntrinsics::make(0, 480, 300.0, 300.0, 319.5, 239.5, {0.0, 0.0, 0.0, 0.0}),
        Error);
}

TEST_CASE("principal point maps to the optical axis") {
    const CameraIntrinsics cam = CameraIntrinsics::synthetic_default();
    const Bearing b = pixel_to_bearing(cam, Vec2(cam.principal_x, cam.principal_y));
    CHECK((b.direction - Vec3(0.0, 0.0, 1.0)).norm() < 1e-12);
    CHECK_THROWS_AS(pixel_to_bearing(cam, Vec2(-1.0, 10.0)), OutOfBounds);
    CHECK_THROWS_AS(pixel_to_bearing(cam, Vec2(10.0, double(cam.height))), OutOfBounds);
}

TEST_CASE("projection round trip over the pixel grid") {
    const CameraIntrinsics cam = CameraIntrinsics::synthetic_default();
    for (int y = 0; y < cam.height; y += 97) {
        for (int x = 0; x < cam.width; x += 101) {
            const Vec2 px{double(x), double(y)};
            const Bearing b = pixel_to_bearing(cam, px);
            const Vec2 back = project_point(cam, b.direction * 3.7);
            CHECK((back - px).norm() < 1e-9);
        }
    }
    CHECK_THROWS_AS(project_point(cam, Vec3(0.1, 0.1, 0.0)), BehindCamera);
    CHECK_THROWS_AS(project_point(cam, Vec3(0.1, 0.1, -2.0)), BehindCamera);
}

TEST_CASE("windowed renderer is bit-identical to the brute-force path") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    const CameraIntrinsics cam =
        CameraIntrinsics::make(320, 240, 150.0, 150.0, 159.5, 119.5, {0.05, 0.0, 0.0, 0.0});
    for (int i = 0; i < 8; ++i) {
        const WorldSnapshot world = random_scene(rng, 1 + i % 5);
        const RigidTransform pose{Rotation::rot_x(M_PI) * Rotation::rot_z(u(rng)),
                                  Vec3(u(rng), u(rng), 1.0 + i * 0.3)};
        const ImageBuffer fast = render_scene(world, pose, cam);
        const ImageBuffer slow = render_scene_brute_force(world, pose, cam);
        REQUIRE(fast == slow);
    }
}

TEST_CASE("renderer paints nearest surface over ground") {
    // Two stacked rectangles straight below the camera: the higher one wins.
    WorldSnapshot world;
    world.surfaces.push_back(SurfaceRect{0.0, 0.0, 0.5, 0.5, 0.0, 0.05, Rgb{10, 20, 30}});
    world.surfaces.push_back(SurfaceRect{0.0, 0.0, 0.2, 0.2, 0.0, 0.30, Rgb{200, 50, 60}});
    const CameraIntrinsics cam = zero_distortion_camera();
    const RigidTransform pose{Rotation::rot_x(M_PI), Vec3(0.0, 0.0, 2.0)};
    const ImageBuffer img = render_scene(world, pose, cam);
    const std::uint8_t* center = img.at(int(cam.principal_x), int(cam.principal_y));
    CHECK(center[0] == 200);
    CHECK(center[1] == 50);
    CHECK(center[2] == 60);
    const std::uint8_t* corner = img.at(0, 0);
    CHECK(corner[0] == 128);  // ground color fills the background
}

TEST_CASE("ppm io round trip") {
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<int> channel(0, 255);
    ImageBuffer img = ImageBuffer::filled(37, 23, 1, 2, 3);
    for (auto& byte : img.pixels) {
        byte = std::uint8_t(channel(rng));
    }
    const std::string path = std::filesystem::temp_directory_path() / "aerograsp_ppm_test.ppm";
    save_ppm(img, path);
    const ImageBuffer loaded = load_ppm(path);
    CHECK(loaded == img);
    std::filesystem::remove(path);
}

TEST_CASE("undistortion straightens world lines") {
    // Points on a straight world line project onto a curve through the
    // fisheye; pulling them back through the undistortion math must land them
    // on a straight pixel line again.
    const CameraIntrinsics cam = CameraIntrinsics::synthetic_default();
    std::vector<Vec2> undistorted;
    for (double s = -0.8; s <= 0.8; s += 0.1) {
        const Vec3 world_point(s, 0.4 + 0.3 * s, 2.0);  // line in the z=2 plane
        const Vec2 px = project_point(cam, world_point);
        const Vec2 centered(px.x() - cam.principal_x, px.y() - cam.principal_y);
        const double r_d = centered.norm();
        const double theta = cam.undistort_angle(r_d / cam.focal_x);
        const Vec2 pinhole = Vec2(cam.principal_x, cam.principal_y) +
                             centered * (cam.focal_x * std::tan(theta) / r_d);
        undistorted.push_back(pinhole);
    }
    // Fit y = a + b x and check residuals.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(undistorted.size());
    for (const Vec2& p : undistorted) {
        sx += p.x();
        sy += p.y();
        sxx += p.x() * p.x();
        sxy += p.x() * p.y();
    }
    const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double a = (sy - b * sx) / n;
    for (const Vec2& p : undistorted) {
        CHECK(std::abs(a + b * p.x() - p.y()) < 1e-8);
    }
}

TEST_CASE("undistort_image resamples into a perspective image") {
    const CameraIntrinsics cam = CameraIntrinsics::synthetic_default();
    WorldSnapshot world;
    world.surfaces.push_back(SurfaceRect{0.3, 0.2, 0.25, 0.25, 0.4, 0.05, Rgb{200, 30, 30}});
    const RigidTransform pose{Rotation::rot_x(M_PI), Vec3(0.0, 0.0, 1.5)};
    const ImageBuffer fisheye = render_scene(world, pose, cam);
    const ImageBuffer flat = undistort_image(fisheye, cam);
    REQUIRE(flat.width == fisheye.width);
    REQUIRE(flat.height == fisheye.height);
    // The center pixel looks along the optical axis in both models.
    const int cx = int(std::lround(cam.principal_x));
    const int cy = int(std::lround(cam.principal_y));
    CHECK(flat.at(cx, cy)[0] == fisheye.at(cx, cy)[0]);
    // Wrong-sized input is rejected.
    const ImageBuffer small = ImageBuffer::filled(10, 10, 0, 0, 0);
    CHECK_THROWS_AS(undistort_image(small, cam), DimensionMismatch);
}
