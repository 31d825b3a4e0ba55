#ifndef TUMBLE_GEOM_HPP
#define TUMBLE_GEOM_HPP

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "tumble/error.hpp"

namespace tumble {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

inline bool is_finite(const Vec3& v)
{
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

/**
 * @brief Proper rotation stored as a unit quaternion.
 *
 * The quaternion is renormalized after every operation and kept in the
 * w >= 0 hemisphere so that equal rotations have equal representations.
 * The 3x3 matrix view is computed on demand.
 */
class Rotation
{
public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}

  /// Throws InvalidArgument for a zero or non-finite quaternion.
  static Rotation from_quaternion(double w, double x, double y, double z)
  {
    return Rotation(Eigen::Quaterniond(w, x, y, z));
  }

  static Rotation from_quaternion(const Eigen::Quaterniond& q) { return Rotation(q); }

  /// Nearest rotation to `m` (via quaternion extraction and renormalization).
  static Rotation from_matrix(const Mat3& m)
  {
    require(m.allFinite(), ErrorKind::InvalidArgument, "rotation matrix has non-finite entries");
    return Rotation(Eigen::Quaterniond(m));
  }

  static Rotation identity() { return {}; }

  static Rotation about_axis(const Vec3& axis, double angle)
  {
    require(is_finite(axis) && axis.norm() > 0.0 && std::isfinite(angle), ErrorKind::InvalidArgument,
            "axis-angle rotation needs a finite non-zero axis");
    return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
  }

  static Rotation rz(double angle) { return about_axis(Vec3::UnitZ(), angle); }

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Mat3 matrix() const { return q_.toRotationMatrix(); }

  Rotation inverse() const { return Rotation(q_.conjugate()); }
  Rotation operator*(const Rotation& other) const { return Rotation(q_ * other.q_); }
  Vec3 operator*(const Vec3& v) const { return q_ * v; }

private:
  explicit Rotation(const Eigen::Quaterniond& q)
  {
    const double n = q.norm();
    require(std::isfinite(n) && n > 1e-300, ErrorKind::InvalidArgument,
            "quaternion must be finite and non-zero");
    q_ = Eigen::Quaterniond(q.coeffs() / n);
    if (q_.w() < 0.0) q_.coeffs() = -q_.coeffs();
  }

  Eigen::Quaterniond q_;
};

inline Rotation rotation_compose(const Rotation& a, const Rotation& b) { return a * b; }
inline Rotation rotation_inverse(const Rotation& r) { return r.inverse(); }

/// Exponential map: rotation vector (axis * angle) to rotation.
inline Rotation so3_exp(const Vec3& phi)
{
  require(is_finite(phi), ErrorKind::InvalidArgument, "rotation vector must be finite");
  const double theta = phi.norm();
  const double half = 0.5 * theta;
  // sin(theta/2)/theta, Taylor expanded near zero
  const double k = theta < 1e-6 ? 0.5 - theta * theta / 48.0 : std::sin(half) / theta;
  return Rotation::from_quaternion(std::cos(half), k * phi.x(), k * phi.y(), k * phi.z());
}

/**
 * @brief Logarithm map: rotation to rotation vector with norm in [0, pi].
 *
 * At exactly pi the axis sign is ambiguous; the axis of the stored
 * quaternion is returned, which may be either of the two.
 */
inline Vec3 so3_log(const Rotation& r)
{
  const Eigen::Quaterniond& q = r.quaternion();
  const Vec3 v = q.vec();
  const double n = v.norm();
  const double w = q.w();  // >= 0 by construction
  double k;
  if (n < 1e-6) {
    // 2*atan2(n, w)/n = (2/w) * (1 - n^2/(3 w^2) + ...)
    k = 2.0 / w * (1.0 - n * n / (3.0 * w * w));
  } else {
    k = 2.0 * std::atan2(n, w) / n;
  }
  return k * v;
}

/// Shortest-arc spherical interpolation, `s` in [0, 1].
inline Rotation slerp(const Rotation& a, const Rotation& b, double s)
{
  return a * so3_exp(s * so3_log(a.inverse() * b));
}

inline Mat3 skew(const Vec3& v)
{
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

/**
 * @brief Camera pose in the reconstruction (target-fixed) frame.
 *
 * `rotation` maps world vectors into the camera frame and `center` is the
 * camera position in world coordinates, so x_cam = R (x_world - c).
 * SfM tools that store t = -R c convert with from_rotation_translation().
 */
struct Pose
{
  Rotation rotation;
  Vec3 center = Vec3::Zero();
  double timestamp = 0.0;

  static Pose from_rotation_translation(const Rotation& r, const Vec3& t, double timestamp = 0.0)
  {
    return Pose{r, -(r.inverse() * t), timestamp};
  }

  Vec3 translation() const { return -(rotation * center); }
};

inline void validate(const Pose& pose)
{
  require(is_finite(pose.center), ErrorKind::InvalidArgument, "pose center must be finite");
  require(std::isfinite(pose.timestamp) && pose.timestamp >= 0.0, ErrorKind::InvalidArgument,
          "pose timestamp must be finite and non-negative");
}

/// Smallest angle (radians) between two lines with the given directions.
inline double line_angle(const Vec3& a, const Vec3& b)
{
  const double c = std::abs(a.normalized().dot(b.normalized()));
  return std::acos(std::min(1.0, c));
}

}  // namespace tumble

#endif  // TUMBLE_GEOM_HPP
