#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace semreg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Rigid transform in SE(3): x -> rotation * x + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return Pose{}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  Pose inverse() const;

  /// Composition: (a * b)(x) == a(b(x)).
  Pose operator*(const Pose& rhs) const;

  Mat4 matrix() const;
  static Pose from_matrix(const Mat4& m);
};

/// Nearest rotation matrix (Frobenius sense) with det = +1.
Mat3 project_to_rotation(const Mat3& m);

/// Rodrigues rotation about a (non-zero) axis.
Mat3 rotation_about_axis(const Vec3& axis, double angle_rad);

/// Minimal rotation taking direction(a) onto direction(b). For
/// antiparallel inputs the pi-rotation axis is chosen as the
/// coordinate axis least aligned with `a`, crossed with `a`.
Mat3 rotation_from_to(const Vec3& a, const Vec3& b);

Mat3 yaw_rotation(double angle_rad);

/// Geodesic rotation angle in degrees, clamped to [0, 180].
double rotation_angle_deg(const Mat3& r);

bool is_rotation(const Mat3& r, double tol = 1e-9);

}  // namespace semreg
