#include "semreg/geometry.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <cmath>

namespace semreg {

Pose Pose::inverse() const {
  Pose out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

Pose Pose::operator*(const Pose& rhs) const {
  Pose out;
  out.rotation = rotation * rhs.rotation;
  out.translation = rotation * rhs.translation + translation;
  return out;
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose Pose::from_matrix(const Mat4& m) {
  Pose p;
  p.rotation = m.topLeftCorner<3, 3>();
  p.translation = m.topRightCorner<3, 1>();
  return p;
}

Mat3 project_to_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (u * v.transpose()).determinant() > 0 ? 1.0 : -1.0;
  return u * d * v.transpose();
}

Mat3 rotation_about_axis(const Vec3& axis, double angle_rad) {
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

Mat3 rotation_from_to(const Vec3& a, const Vec3& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= 0.0 || nb <= 0.0) return Mat3::Identity();
  const Vec3 u = a / na;
  const Vec3 v = b / nb;
  const double c = u.dot(v);
  if (c > 1.0 - 1e-14) return Mat3::Identity();
  if (c < -1.0 + 1e-14) {
    // Antiparallel: pi about a deterministic axis perpendicular to u.
    int k = 0;
    if (std::abs(u.y()) < std::abs(u[k])) k = 1;
    if (std::abs(u.z()) < std::abs(u[k])) k = 2;
    Vec3 e = Vec3::Zero();
    e[k] = 1.0;
    const Vec3 axis = u.cross(e).normalized();
    return rotation_about_axis(axis, M_PI);
  }
  const Vec3 w = u.cross(v);
  Mat3 wx;
  wx << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return Mat3::Identity() + wx + wx * wx * (1.0 / (1.0 + c));
}

Mat3 yaw_rotation(double angle_rad) {
  return rotation_about_axis(Vec3::UnitZ(), angle_rad);
}

double rotation_angle_deg(const Mat3& r) {
  // atan2 form of the geodesic angle: acos((tr-1)/2) loses ~1e-6 deg of
  // resolution near zero, this stays exact at both ends of [0, pi].
  const Vec3 skew(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = 0.5 * skew.norm();
  const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::atan2(s, c) * 180.0 / M_PI;
}

bool is_rotation(const Mat3& r, double tol) {
  const double orth = (r.transpose() * r - Mat3::Identity()).norm();
  return orth < tol && std::abs(r.determinant() - 1.0) < tol;
}

}  // namespace semreg
