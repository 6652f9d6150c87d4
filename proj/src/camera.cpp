#include "aerograsp/camera.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace aerograsp {

namespace {

constexpr double kMinDepth = 1e-6;
constexpr double kMaxIncidence = 0.5 * M_PI - 1e-3;

double eval_theta_d(const std::array<double, 4>& d, double theta) {
    const double t2 = theta * theta;
    return theta * (1.0 + t2 * (d[0] + t2 * (d[1] + t2 * (d[2] + t2 * d[3]))));
}

double eval_theta_d_deriv(const std::array<double, 4>& d, double theta) {
    const double t2 = theta * theta;
    return 1.0 + t2 * (3.0 * d[0] + t2 * (5.0 * d[1] + t2 * (7.0 * d[2] + t2 * 9.0 * d[3])));
}

}  // namespace

double CameraIntrinsics::distort_angle(double theta) const {
    return eval_theta_d(distortion, theta);
}

double CameraIntrinsics::undistort_angle(double theta_d) const {
    double theta = theta_d;
    for (int i = 0; i < 20; ++i) {
        const double err = eval_theta_d(distortion, theta) - theta_d;
        const double deriv = eval_theta_d_deriv(distortion, theta);
        const double step = err / deriv;
        theta -= step;
        if (std::abs(step) < 1e-14) {
            return theta;
        }
    }
    throw NoConvergence("distortion inversion did not converge in 20 iterations");
}

CameraIntrinsics CameraIntrinsics::make(int width, int height, double focal_x, double focal_y,
                                        double principal_x, double principal_y,
                                        const std::array<double, 4>& distortion) {
    if (width <= 0 || height <= 0) {
        throw Error("image dimensions must be positive");
    }
    if (!(focal_x > 0.0) || !(focal_y > 0.0)) {
        throw Error("focal lengths must be positive");
    }
    if (principal_x < 0.0 || principal_x > width - 1 || principal_y < 0.0 ||
        principal_y > height - 1) {
        throw Error("principal point must lie inside the image");
    }
    CameraIntrinsics intr{width, height, focal_x, focal_y, principal_x, principal_y, distortion};

    // Monotonicity of theta_d over [0, 100 deg], sampled at 0.1 deg.
    const double theta_max = 100.0 * M_PI / 180.0;
    double prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double theta = theta_max * i / 1000.0;
        const double td = intr.distort_angle(theta);
        if (!(td > prev)) {
            throw Error("distortion polynomial is not monotonic over [0, 100 deg]");
        }
        prev = td;
    }

    // Every pixel must invert to a forward-looking ray.
    const double corner_x = std::max(principal_x, width - 1 - principal_x) / focal_x;
    const double corner_y = std::max(principal_y, height - 1 - principal_y) / focal_y;
    const double theta_d_corner = std::hypot(corner_x, corner_y);
    if (intr.undistort_angle(theta_d_corner) >= kMaxIncidence) {
        throw Error("field of view reaches 90 deg incidence; corner pixels have no bearing");
    }
    return intr;
}

CameraIntrinsics CameraIntrinsics::synthetic_default() {
    return make(1024, 768, 400.0, 400.0, 511.5, 383.5, {0.05, 0.0, 0.0, 0.0});
}

ImageBuffer ImageBuffer::filled(int width, int height, std::uint8_t r, std::uint8_t g,
                                std::uint8_t b) {
    ImageBuffer img;
    img.width = width;
    img.height = height;
    img.pixels.resize(std::size_t(width) * height * 3);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        img.pixels[i] = r;
        img.pixels[i + 1] = g;
        img.pixels[i + 2] = b;
    }
    return img;
}

ImageBuffer load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path);
    }
    auto next_token = [&in, &path]() {
        std::string tok;
        int c = in.get();
        while (c != EOF) {
            if (c == '#') {
                while (c != EOF && c != '\n') c = in.get();
            } else if (std::isspace(c)) {
                c = in.get();
            } else {
                break;
            }
        }
        while (c != EOF && !std::isspace(c)) {
            tok.push_back(char(c));
            c = in.get();
        }
        if (tok.empty()) {
            throw Error("truncated PPM header in " + path);
        }
        return tok;
    };
    if (next_token() != "P6") {
        throw Error(path + " is not a binary PPM (P6)");
    }
    ImageBuffer img;
    img.width = std::stoi(next_token());
    img.height = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (img.width <= 0 || img.height <= 0 || maxval != 255) {
        throw Error(path + ": unsupported PPM geometry or maxval");
    }
    img.pixels.resize(std::size_t(img.width) * img.height * 3);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            std::streamsize(img.pixels.size()));
    if (in.gcount() != std::streamsize(img.pixels.size())) {
        throw Error(path + ": truncated pixel data");
    }
    return img;
}

void save_ppm(const ImageBuffer& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path);
    }
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              std::streamsize(img.pixels.size()));
}

Bearing pixel_to_bearing(const CameraIntrinsics& intrinsics, const Vec2& pixel) {
    if (pixel.x() < 0.0 || pixel.x() > intrinsics.width - 1 || pixel.y() < 0.0 ||
        pixel.y() > intrinsics.height - 1) {
        throw OutOfBounds("pixel outside image bounds");
    }
    const double mx = (pixel.x() - intrinsics.principal_x) / intrinsics.focal_x;
    const double my = (pixel.y() - intrinsics.principal_y) / intrinsics.focal_y;
    const double theta_d = std::hypot(mx, my);
    if (theta_d < 1e-12) {
        return Bearing{Vec3(0.0, 0.0, 1.0)};
    }
    const double theta = intrinsics.undistort_angle(theta_d);
    const double s = std::sin(theta) / theta_d;
    return Bearing{Vec3(s * mx, s * my, std::cos(theta))};
}

Vec2 project_point(const CameraIntrinsics& intrinsics, const Vec3& point_camera_frame) {
    if (point_camera_frame.z() <= kMinDepth) {
        throw BehindCamera("point is behind the camera");
    }
    const double r_xy = std::hypot(point_camera_frame.x(), point_camera_frame.y());
    if (r_xy < 1e-15) {
        return Vec2(intrinsics.principal_x, intrinsics.principal_y);
    }
    const double theta = std::atan2(r_xy, point_camera_frame.z());
    const double theta_d = intrinsics.distort_angle(theta);
    return Vec2(intrinsics.principal_x +
                    intrinsics.focal_x * theta_d * point_camera_frame.x() / r_xy,
                intrinsics.principal_y +
                    intrinsics.focal_y * theta_d * point_camera_frame.y() / r_xy);
}

ImageBuffer undistort_image(const ImageBuffer& img, const CameraIntrinsics& intrinsics) {
    if (img.width != intrinsics.width || img.height != intrinsics.height) {
        throw DimensionMismatch("image dimensions do not match the intrinsics");
    }
    ImageBuffer out = ImageBuffer::filled(img.width, img.height, 0, 0, 0);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double mx = (x - intrinsics.principal_x) / intrinsics.focal_x;
            const double my = (y - intrinsics.principal_y) / intrinsics.focal_y;
            const Vec2 src = project_point(intrinsics, Vec3(mx, my, 1.0));
            const long sx = std::lround(src.x());
            const long sy = std::lround(src.y());
            if (sx >= 0 && sx < img.width && sy >= 0 && sy < img.height) {
                const std::uint8_t* p = img.at(int(sx), int(sy));
                out.set(x, y, p[0], p[1], p[2]);
            }
        }
    }
    return out;
}

namespace {

using BearingTable = std::vector<Vec3>;
using IntrinsicsKey = std::tuple<int, int, double, double, double, double, double, double,
                                 double, double>;

IntrinsicsKey key_of(const CameraIntrinsics& i) {
    return {i.width, i.height, i.focal_x, i.focal_y, i.principal_x, i.principal_y,
            i.distortion[0], i.distortion[1], i.distortion[2], i.distortion[3]};
}

// Per-pixel camera-frame rays are pose independent; cache them per intrinsics.
const BearingTable& bearing_table(const CameraIntrinsics& intrinsics) {
    static std::mutex mutex;
    static std::map<IntrinsicsKey, std::unique_ptr<BearingTable>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[key_of(intrinsics)];
    if (!slot) {
        if (cache.size() > 8) {
            for (auto it = cache.begin(); it != cache.end();) {
                it = (&it->second != &slot) ? cache.erase(it) : std::next(it);
            }
        }
        auto table = std::make_unique<BearingTable>();
        table->reserve(std::size_t(intrinsics.width) * intrinsics.height);
        for (int y = 0; y < intrinsics.height; ++y) {
            for (int x = 0; x < intrinsics.width; ++x) {
                table->push_back(pixel_to_bearing(intrinsics, Vec2(x, y)).direction);
            }
        }
        slot = std::move(table);
    }
    return *slot;
}

struct RectGeom {
    double cx, cy, z_top;
    double cos_yaw, sin_yaw;
    double half_width, half_depth;
    Rgb color;
};

std::vector<RectGeom> sorted_rects(const WorldSnapshot& world) {
    std::vector<RectGeom> rects;
    rects.reserve(world.surfaces.size());
    for (const SurfaceRect& s : world.surfaces) {
        rects.push_back(RectGeom{s.center_x, s.center_y, s.z_top, std::cos(s.yaw),
                                 std::sin(s.yaw), s.half_width, s.half_depth, s.color});
    }
    std::stable_sort(rects.begin(), rects.end(),
                     [](const RectGeom& a, const RectGeom& b) { return a.z_top > b.z_top; });
    return rects;
}

// Highest surface hit by a descending ray wins; everything else is background.
inline Rgb shade_ray(const std::vector<RectGeom>& rects, const Vec3& origin, const Vec3& dir,
                     const Rgb& background) {
    if (dir.z() >= -1e-9) {
        return background;
    }
    for (const RectGeom& r : rects) {
        const double s = (r.z_top - origin.z()) / dir.z();
        if (s <= kMinDepth) {
            continue;
        }
        const double px = origin.x() + s * dir.x() - r.cx;
        const double py = origin.y() + s * dir.y() - r.cy;
        const double local_x = r.cos_yaw * px + r.sin_yaw * py;
        const double local_y = -r.sin_yaw * px + r.cos_yaw * py;
        if (std::abs(local_x) <= r.half_width && std::abs(local_y) <= r.half_depth) {
            return r.color;
        }
    }
    return background;
}

struct PixelWindow {
    int x0, y0, x1, y1;  // inclusive
    bool full = false;
};

// Conservative pixel window around a rectangle: project 9 boundary points,
// take their bbox, pad by half its extent plus a fixed margin. Falls back to
// the full image when any point is too close to the camera plane.
PixelWindow surface_window(const RectGeom& r, const RigidTransform& camera_from_world,
                           const CameraIntrinsics& intr) {
    PixelWindow win{0, 0, intr.width - 1, intr.height - 1, true};
    double min_x = 1e30, min_y = 1e30, max_x = -1e30, max_y = -1e30;
    for (int ix = -1; ix <= 1; ++ix) {
        for (int iy = -1; iy <= 1; ++iy) {
            const double lx = ix * r.half_width;
            const double ly = iy * r.half_depth;
            const Vec3 world(r.cx + r.cos_yaw * lx - r.sin_yaw * ly,
                             r.cy + r.sin_yaw * lx + r.cos_yaw * ly, r.z_top);
            const Vec3 cam = camera_from_world.apply(world);
            if (cam.z() <= 1e-3) {
                return win;
            }
            Vec2 px;
            try {
                px = project_point(intr, cam);
            } catch (const BehindCamera&) {
                return win;
            }
            min_x = std::min(min_x, px.x());
            max_x = std::max(max_x, px.x());
            min_y = std::min(min_y, px.y());
            max_y = std::max(max_y, px.y());
        }
    }
    const double pad = 0.5 * std::max(max_x - min_x, max_y - min_y) + 16.0;
    win.full = false;
    win.x0 = std::max(0, int(std::floor(min_x - pad)));
    win.y0 = std::max(0, int(std::floor(min_y - pad)));
    win.x1 = std::min(intr.width - 1, int(std::ceil(max_x + pad)));
    win.y1 = std::min(intr.height - 1, int(std::ceil(max_y + pad)));
    return win;
}

ImageBuffer render_impl(const WorldSnapshot& world, const RigidTransform& camera_pose_world,
                        const CameraIntrinsics& intrinsics, bool cull) {
    const BearingTable& table = bearing_table(intrinsics);
    const Mat3& rot = camera_pose_world.rotation.matrix();
    const Vec3& origin = camera_pose_world.translation;
    const std::vector<RectGeom> rects = sorted_rects(world);

    ImageBuffer img = ImageBuffer::filled(intrinsics.width, intrinsics.height,
                                          world.background.r, world.background.g,
                                          world.background.b);
    auto shade_pixel = [&](int x, int y) {
        const Vec3 dir = rot * table[std::size_t(y) * intrinsics.width + x];
        const Rgb c = shade_ray(rects, origin, dir, world.background);
        img.set(x, y, c.r, c.g, c.b);
    };

    if (!cull || rects.empty()) {
        if (!rects.empty()) {
            for (int y = 0; y < intrinsics.height; ++y) {
                for (int x = 0; x < intrinsics.width; ++x) {
                    shade_pixel(x, y);
                }
            }
        }
        return img;
    }

    const RigidTransform camera_from_world = camera_pose_world.inverse();
    std::vector<std::uint8_t> visited(std::size_t(intrinsics.width) * intrinsics.height, 0);
    for (const RectGeom& r : rects) {
        const PixelWindow win = surface_window(r, camera_from_world, intrinsics);
        for (int y = win.y0; y <= win.y1; ++y) {
            std::uint8_t* row = &visited[std::size_t(y) * intrinsics.width];
            for (int x = win.x0; x <= win.x1; ++x) {
                if (!row[x]) {
                    row[x] = 1;
                    shade_pixel(x, y);
                }
            }
        }
    }
    return img;
}

}  // namespace

ImageBuffer render_scene(const WorldSnapshot& world, const RigidTransform& camera_pose_world,
                         const CameraIntrinsics& intrinsics) {
    return render_impl(world, camera_pose_world, intrinsics, true);
}

ImageBuffer render_scene_brute_force(const WorldSnapshot& world,
                                     const RigidTransform& camera_pose_world,
                                     const CameraIntrinsics& intrinsics) {
    return render_impl(world, camera_pose_world, intrinsics, false);
}

}  // namespace aerograsp
