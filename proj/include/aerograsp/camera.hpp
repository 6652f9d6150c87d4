#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aerograsp/frames.hpp"

namespace aerograsp {

/// Equidistant fisheye camera: a ray at incidence angle theta lands at
/// radius focal * theta_d, with theta_d = theta * (1 + d0 theta^2 +
/// d1 theta^4 + d2 theta^6 + d3 theta^8).
struct CameraIntrinsics {
    int width = 0;
    int height = 0;
    double focal_x = 0.0;
    double focal_y = 0.0;
    double principal_x = 0.0;
    double principal_y = 0.0;
    std::array<double, 4> distortion{0.0, 0.0, 0.0, 0.0};

    /// Validates focal lengths, principal point, that the distortion
    /// polynomial is monotonic over [0, 100 deg], and that every pixel maps
    /// to a forward-looking ray (incidence < 90 deg).
    static CameraIntrinsics make(int width, int height, double focal_x, double focal_y,
                                 double principal_x, double principal_y,
                                 const std::array<double, 4>& distortion);

    /// Synthetic default: 1024x768, focal 400 px, centered principal point,
    /// mild barrel distortion.
    static CameraIntrinsics synthetic_default();

    double distort_angle(double theta) const;
    /// Inverts distort_angle by Newton iteration (<= 20 steps).
    double undistort_angle(double theta_d) const;
};

/// Row-major 8-bit RGB image.
struct ImageBuffer {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3

    static ImageBuffer filled(int width, int height, std::uint8_t r, std::uint8_t g,
                              std::uint8_t b);

    const std::uint8_t* at(int x, int y) const { return &pixels[3 * (std::size_t(y) * width + x)]; }
    std::uint8_t* at(int x, int y) { return &pixels[3 * (std::size_t(y) * width + x)]; }

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        std::uint8_t* p = at(x, y);
        p[0] = r; p[1] = g; p[2] = b;
    }

    bool operator==(const ImageBuffer& o) const = default;
};

/// Binary PPM (P6, maxval 255) I/O.
ImageBuffer load_ppm(const std::string& path);
void save_ppm(const ImageBuffer& img, const std::string& path);

/// Pixel (center-of-pixel coordinates, integer = pixel center) to unit
/// camera-frame bearing. Throws OutOfBounds outside the image and
/// NoConvergence if the distortion inversion fails.
Bearing pixel_to_bearing(const CameraIntrinsics& intrinsics, const Vec2& pixel);

/// Camera-frame point to pixel through the fisheye model. Throws
/// BehindCamera when z <= 1e-6 m.
Vec2 project_point(const CameraIntrinsics& intrinsics, const Vec3& point_camera_frame);

/// Resamples the fisheye image onto an ideal pinhole (perspective) image
/// with the same intrinsics matrix, nearest-neighbor. Straight world lines
/// come out straight. Throws DimensionMismatch if img does not match
/// the intrinsics.
ImageBuffer undistort_image(const ImageBuffer& img, const CameraIntrinsics& intrinsics);

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

/// Horizontal rectangle at height z_top: a yawed width x depth footprint
/// centered on (center_x, center_y), painted in one flat color.
struct SurfaceRect {
    double center_x = 0.0;
    double center_y = 0.0;
    double half_width = 0.0;
    double half_depth = 0.0;
    double yaw = 0.0;  // radians about world z
    double z_top = 0.0;
    Rgb color;
};

/// Scene snapshot for the renderer: colored horizontal rectangles over an
/// infinite ground plane. The background color doubles as the ground color
/// and must stay outside every detector threshold.
struct WorldSnapshot {
    Rgb background{128, 128, 128};
    std::vector<SurfaceRect> surfaces;
};

/// Casts one ray per pixel from the camera pose (world frame), intersects
/// object top planes and the ground (nearest hit wins), and writes flat
/// colors. Deterministic; bit-identical to the brute-force per-pixel path.
ImageBuffer render_scene(const WorldSnapshot& world, const RigidTransform& camera_pose_world,
                         const CameraIntrinsics& intrinsics);

/// Same output as render_scene, but without the per-surface pixel-window
/// culling. Kept for oracle tests.
ImageBuffer render_scene_brute_force(const WorldSnapshot& world,
                                     const RigidTransform& camera_pose_world,
                                     const CameraIntrinsics& intrinsics);

}  // namespace aerograsp
