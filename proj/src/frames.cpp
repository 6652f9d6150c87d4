#include "aerograsp/frames.hpp"

#include <cmath>

namespace aerograsp {

namespace {
constexpr double kRotationTol = 1e-9;
}

Rotation Rotation::from_matrix(const Mat3& m) {
    Mat3 gram = m.transpose() * m;
    if (!((gram - Mat3::Identity()).cwiseAbs().maxCoeff() <= kRotationTol)) {
        throw NotARotation("matrix is not orthonormal within 1e-9");
    }
    if (!(std::abs(m.determinant() - 1.0) <= kRotationTol)) {
        throw NotARotation("matrix determinant is not +1 within 1e-9");
    }
    return Rotation(m, Unchecked{});
}

Rotation Rotation::rot_x(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    Mat3 m;
    m << 1, 0, 0,
         0, c, -s,
         0, s, c;
    return Rotation(m, Unchecked{});
}

Rotation Rotation::rot_y(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    Mat3 m;
    m << c, 0, s,
         0, 1, 0,
         -s, 0, c;
    return Rotation(m, Unchecked{});
}

Rotation Rotation::rot_z(double rad) {
    const double c = std::cos(rad), s = std::sin(rad);
    Mat3 m;
    m << c, -s, 0,
         s, c, 0,
         0, 0, 1;
    return Rotation(m, Unchecked{});
}

Rotation Rotation::rpy(double roll, double pitch, double yaw) {
    return rot_z(yaw) * rot_y(pitch) * rot_x(roll);
}

Bearing Bearing::from_vector(const Vec3& v) {
    const double n = v.norm();
    if (n < 1e-12) {
        throw Error("bearing vector has near-zero norm");
    }
    Vec3 unit = v / n;
    if (unit.z() <= 0.0) {
        throw Error("bearing must point toward the scene (camera z > 0)");
    }
    return Bearing{unit};
}

ExtrinsicCalibration ExtrinsicCalibration::down_looking(const Vec3& translation) {
    return ExtrinsicCalibration{Rotation::rot_x(M_PI), translation};
}

Vec3 bearing_to_world(const Rotation& attitude, const ExtrinsicCalibration& extrinsics,
                      const Bearing& bearing) {
    return attitude * (extrinsics.rotation_mav_to_camera * bearing.direction);
}

Vec3 ray_ground_intersect(const Vec3& world_bearing, double height_above_object) {
    if (!(height_above_object > 0.0)) {
        throw Error("height above object must be positive");
    }
    const double dz = world_bearing.z();
    if (dz >= -1e-6) {
        throw RayParallelToGround("bearing does not descend toward the object plane");
    }
    const double scale = -height_above_object / dz;
    Vec3 offset = scale * world_bearing;
    offset.z() = -height_above_object;  // z is -h exactly, not scale*dz rounding
    return offset;
}

Vec3 object_offset_world(const Rotation& attitude, const ExtrinsicCalibration& extrinsics,
                         const Vec3& camera_offset) {
    return attitude * (extrinsics.translation_mav_to_camera +
                       extrinsics.rotation_mav_to_camera * camera_offset);
}

RigidTransform relative_transform(const Rotation& attitude_relative, const Vec3& offset) {
    return RigidTransform{attitude_relative, offset};
}

}  // namespace aerograsp
