#pragma once

#include <Eigen/Dense>

#include "aerograsp/errors.hpp"

namespace aerograsp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Proper rotation matrix (orthonormal, det +1). Frame conventions used
/// throughout: world z up, camera z toward the scene; a level MAV with a
/// down-looking camera maps camera z onto world -z.
class Rotation {
public:
    Rotation() : m_(Mat3::Identity()) {}

    static Rotation identity() { return Rotation(); }

    /// Validates orthonormality and det = +1 to 1e-9 per element.
    static Rotation from_matrix(const Mat3& m);

    static Rotation rot_x(double rad);
    static Rotation rot_y(double rad);
    static Rotation rot_z(double rad);

    /// ZYX convention: Rz(yaw) * Ry(pitch) * Rx(roll).
    static Rotation rpy(double roll, double pitch, double yaw);

    const Mat3& matrix() const { return m_; }
    Rotation inverse() const { return Rotation(m_.transpose(), Unchecked{}); }

    Vec3 operator*(const Vec3& v) const { return m_ * v; }
    Rotation operator*(const Rotation& o) const {
        return Rotation(m_ * o.m_, Unchecked{});
    }

private:
    struct Unchecked {};
    Rotation(const Mat3& m, Unchecked) : m_(m) {}
    Mat3 m_;
};

/// Unit direction in camera frame pointing at a scene feature. The camera
/// z-axis points toward the scene, so z > 0 for anything in view.
struct Bearing {
    Vec3 direction;

    /// Normalizes v; rejects vectors with non-positive z or near-zero norm.
    static Bearing from_vector(const Vec3& v);
};

struct RigidTransform {
    Rotation rotation;
    Vec3 translation{0.0, 0.0, 0.0};

    static RigidTransform identity() { return RigidTransform{}; }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    RigidTransform inverse() const {
        Rotation rinv = rotation.inverse();
        return RigidTransform{rinv, -(rinv * translation)};
    }

    RigidTransform operator*(const RigidTransform& o) const {
        return RigidTransform{rotation * o.rotation, rotation * o.translation + translation};
    }
};

/// Fixed camera mount: rotation and translation from MAV base frame to the
/// camera center.
struct ExtrinsicCalibration {
    Rotation rotation_mav_to_camera;
    Vec3 translation_mav_to_camera{0.0, 0.0, 0.0};

    /// Down-looking mount for a level MAV: camera z -> world -z,
    /// camera x -> MAV x (a 180 degree roll of the camera).
    static ExtrinsicCalibration down_looking(const Vec3& translation = Vec3::Zero());
};

/// Rotates a camera-frame bearing into the world frame:
/// attitude * mount rotation * bearing. Unit norm is preserved.
Vec3 bearing_to_world(const Rotation& attitude, const ExtrinsicCalibration& extrinsics,
                      const Bearing& bearing);

/// Scales a descending world-frame unit bearing so it meets the horizontal
/// plane `height_above_object` meters below the camera. The result is the
/// camera-to-object offset, world-aligned; its z component is exactly
/// -height_above_object. Throws RayParallelToGround when the bearing does
/// not descend (z >= -1e-6).
Vec3 ray_ground_intersect(const Vec3& world_bearing, double height_above_object);

/// MAV-base-to-object translation in world frame given the camera-frame
/// offset of the object from the camera center:
/// attitude * (mount translation + mount rotation * camera_offset).
Vec3 object_offset_world(const Rotation& attitude, const ExtrinsicCalibration& extrinsics,
                         const Vec3& camera_offset);

/// Packs a relative attitude and translation into one rigid transform.
RigidTransform relative_transform(const Rotation& attitude_relative, const Vec3& offset);

}  // namespace aerograsp
