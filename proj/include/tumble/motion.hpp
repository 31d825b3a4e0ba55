#ifndef TUMBLE_MOTION_HPP
#define TUMBLE_MOTION_HPP

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tumble/plane.hpp"
#include "tumble/sine_fit.hpp"
#include "tumble/text_io.hpp"
#include "tumble/trajectory.hpp"

namespace tumble {

/// Metres per reconstruction unit.
struct ScaleReference
{
  double scale_c = 1.0;
  std::string provenance = "direct";
};

inline void validate(const ScaleReference& scale)
{
  require(std::isfinite(scale.scale_c) && scale.scale_c > 0.0, ErrorKind::InvalidArgument,
          "scale coefficient must be positive and finite");
}

/// Scale from two reconstructed points a known physical distance apart.
inline ScaleReference scale_from_known_length(const Vec3& p_a, const Vec3& p_b, double true_length_m)
{
  require(is_finite(p_a) && is_finite(p_b), ErrorKind::InvalidArgument, "points must be finite");
  require(std::isfinite(true_length_m) && true_length_m > 0.0, ErrorKind::InvalidArgument,
          "known length must be positive");
  const double d = (p_a - p_b).norm();
  require(d > 0.0, ErrorKind::InvalidArgument, "reference points coincide");
  return {true_length_m / d, "known length " + text::fmt9(true_length_m) + " m"};
}

/// Vectors from the target origin to each camera center.
inline std::vector<Vec3> radius_vectors(const PoseTrajectory& traj, const Vec3& origin)
{
  require(!traj.empty(), ErrorKind::EmptyInput, "trajectory has no poses");
  std::vector<Vec3> r;
  r.reserve(traj.size());
  for (const Pose& p : traj.poses) r.push_back(p.center - origin);
  return r;
}

struct LinearStep
{
  double L = 0.0;             ///< change of radius norm, reconstruction units
  double radial_speed = 0.0;  ///< c L / dt, m/s
  Vec3 velocity = Vec3::Zero();  ///< radial_speed * e_d, world axes
};

namespace detail {

inline void require_motion_input(const PoseTrajectory& traj)
{
  require(traj.size() >= 2, ErrorKind::InvalidArgument, "motion estimation needs at least two poses");
  for (std::size_t i = 1; i < traj.size(); ++i) {
    require(traj.poses[i].timestamp > traj.poses[i - 1].timestamp, ErrorKind::InvalidArgument,
            "timestamps must be strictly increasing (pose " + std::to_string(i) + ")");
  }
}

}  // namespace detail

/**
 * @brief Range change and speed per interval.
 *
 * L = |r_{t+1}| - |r_t|, radial_speed = c L / dt. The velocity vector is
 * radial_speed along the unit displacement e_d = (r_{t+1} - r_t) / |...|;
 * below 1e-12 units of displacement e_d and the vector are zero.
 */
inline std::vector<LinearStep> linear_motion(const PoseTrajectory& traj, const Vec3& origin, const ScaleReference& scale)
{
  detail::require_motion_input(traj);
  validate(scale);
  const auto r = radius_vectors(traj, origin);
  std::vector<LinearStep> steps;
  steps.reserve(r.size() - 1);
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double dt = traj.poses[i + 1].timestamp - traj.poses[i].timestamp;
    LinearStep s;
    s.L = r[i + 1].norm() - r[i].norm();
    s.radial_speed = scale.scale_c * s.L / dt;
    const Vec3 displacement = r[i + 1] - r[i];
    const double len = displacement.norm();
    if (len >= 1e-12) s.velocity = s.radial_speed * displacement / len;
    steps.push_back(s);
  }
  return steps;
}

/**
 * @brief Target attitude change over each interval.
 *
 * With ^T R_C the camera orientation in the target frame (the transpose of
 * the stored world-to-camera rotation), R(phi) = ^T R_{C_t} (^T R_{C_{t+1}})^-1.
 * By construction R(phi)^-1 ^T R_{C_t} = ^T R_{C_{t+1}}; the camera's apparent
 * rotation is the inverse of the target's.
 */
inline std::vector<Rotation> rotation_increments(const PoseTrajectory& traj)
{
  require(traj.size() >= 2, ErrorKind::InvalidArgument, "rotation increments need at least two poses");
  std::vector<Rotation> inc;
  inc.reserve(traj.size() - 1);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const Rotation cam_in_target_t = traj.poses[i].rotation.inverse();
    const Rotation cam_in_target_next = traj.poses[i + 1].rotation.inverse();
    inc.push_back(cam_in_target_t * cam_in_target_next.inverse());
  }
  return inc;
}

/// Rotation vector of each increment divided by its interval. Throws
/// Aliasing when an interval rotates by pi - 1e-6 or more.
inline std::vector<Vec3> angular_velocity(const std::vector<Rotation>& increments, const std::vector<double>& timestamps)
{
  require(timestamps.size() == increments.size() + 1, ErrorKind::InvalidArgument,
          "need one more timestamp than increments");
  std::vector<Vec3> omega;
  omega.reserve(increments.size());
  for (std::size_t i = 0; i < increments.size(); ++i) {
    const double dt = timestamps[i + 1] - timestamps[i];
    require(dt > 0.0, ErrorKind::InvalidArgument, "timestamps must be strictly increasing");
    const Vec3 phi = so3_log(increments[i]);
    if (phi.norm() >= kPi - 1e-6) {
      throw Error(ErrorKind::Aliasing, "interval " + std::to_string(i) + " rotates by " +
                                           text::fmt9(phi.norm() * kRadToDeg) +
                                           " deg; sampling is too slow for the spin rate");
    }
    omega.push_back(phi / dt);
  }
  return omega;
}

struct MotionRecord
{
  double t_start = 0.0;
  double t_end = 0.0;
  double t_mid = 0.0;
  double L = 0.0;
  double radial_speed = 0.0;       ///< m/s
  Vec3 velocity = Vec3::Zero();    ///< m/s, target axes
  Vec3 phi = Vec3::Zero();         ///< rad, target axes
  Vec3 omega = Vec3::Zero();       ///< rad/s, target axes
};

struct MotionEstimate
{
  std::vector<MotionRecord> records;
  TargetFrame frame;
  ScaleReference scale;
  std::array<std::optional<SineFit>, 3> omega_fits;  ///< per target axis, rad/s

  std::vector<double> mid_times() const
  {
    std::vector<double> t;
    for (const auto& r : records) t.push_back(r.t_mid);
    return t;
  }

  std::vector<double> omega_component(int axis) const
  {
    std::vector<double> v;
    for (const auto& r : records) v.push_back(r.omega[axis]);
    return v;
  }
};

/// Fits a sine to each omega component; components that are flat,
/// too short or not periodic keep no fit.
inline void attach_sine_fits(MotionEstimate& est)
{
  for (auto& fit : est.omega_fits) fit.reset();
  if (est.records.size() < 8) return;
  const auto t = est.mid_times();
  for (int k = 0; k < 3; ++k) {
    try {
      est.omega_fits[static_cast<std::size_t>(k)] = fit_sine(t, est.omega_component(k));
    } catch (const Error&) {
      // constant or non-periodic component
    }
  }
}

/**
 * @brief Full translation + rotation estimate in the target frame.
 *
 * Radius vectors are taken from frame.origin; every vector output is
 * re-expressed along the frame axes and rates are placed at interval
 * midpoints. A sine is fitted to each omega component where possible.
 */
inline MotionEstimate estimate_motion(const PoseTrajectory& traj, const TargetFrame& frame, const ScaleReference& scale)
{
  const auto linear = linear_motion(traj, frame.origin, scale);
  const auto increments = rotation_increments(traj);
  std::vector<double> times;
  for (const auto& p : traj.poses) times.push_back(p.timestamp);
  const auto omega = angular_velocity(increments, times);

  MotionEstimate est;
  est.frame = frame;
  est.scale = scale;
  est.records.reserve(linear.size());
  for (std::size_t i = 0; i < linear.size(); ++i) {
    MotionRecord r;
    r.t_start = times[i];
    r.t_end = times[i + 1];
    r.t_mid = 0.5 * (times[i] + times[i + 1]);
    r.L = linear[i].L;
    r.radial_speed = linear[i].radial_speed;
    r.velocity = frame.to_target(linear[i].velocity);
    r.phi = frame.to_target(so3_log(increments[i]));
    r.omega = frame.to_target(omega[i]);
    est.records.push_back(r);
  }
  attach_sine_fits(est);
  return est;
}

/**
 * @brief Angular velocity along the camera axes, one vector per record.
 *
 * For a camera fixed in inertial space this is omega in inertial axes (up to
 * the camera's constant mounting rotation). The increment axis is invariant
 * under its own rotation, so either endpoint pose gives the same result.
 */
inline std::vector<Vec3> omega_in_camera_axes(const MotionEstimate& est, const PoseTrajectory& traj)
{
  require(traj.size() == est.records.size() + 1, ErrorKind::InvalidArgument,
          "trajectory does not match the motion estimate");
  std::vector<Vec3> out;
  out.reserve(est.records.size());
  for (std::size_t i = 0; i < est.records.size(); ++i) {
    out.push_back(traj.poses[i].rotation * (est.frame.axes * est.records[i].omega));
  }
  return out;
}

inline constexpr std::string_view kMotionCsvHeader = "t_mid_s,L,radial_speed_m_s,vx,vy,vz,wx_deg_s,wy_deg_s,wz_deg_s";

inline std::string write_motion_csv(const MotionEstimate& est)
{
  std::string out(kMotionCsvHeader);
  out += '\n';
  for (const auto& r : est.records) {
    const double v[] = {r.t_mid,
                        r.L,
                        r.radial_speed,
                        r.velocity.x(),
                        r.velocity.y(),
                        r.velocity.z(),
                        r.omega.x() * kRadToDeg,
                        r.omega.y() * kRadToDeg,
                        r.omega.z() * kRadToDeg};
    for (std::size_t i = 0; i < 9; ++i) {
      if (i) out += ',';
      out += text::fmt9(v[i]);
    }
    out += '\n';
  }
  return out;
}

/// Reads motion records back; interval bounds are not part of the CSV and
/// are left equal to t_mid.
inline std::vector<MotionRecord> read_motion_csv(std::string_view content)
{
  const auto lines = text::split_lines(content);
  if (lines.empty() || text::trim(lines[0]) != kMotionCsvHeader) {
    throw Error(ErrorKind::Schema, "motion CSV must start with header '" + std::string(kMotionCsvHeader) + "'");
  }
  std::vector<MotionRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto fields = text::split(lines[i], ',');
    if (fields.size() != 9) throw Error(ErrorKind::Parse, "motion line " + std::to_string(i + 1) + ": expected 9 fields");
    double v[9];
    for (std::size_t k = 0; k < 9; ++k) {
      const auto d = text::to_double(fields[k]);
      if (!d || !std::isfinite(*d)) throw Error(ErrorKind::Parse, "motion line " + std::to_string(i + 1) + ": bad number");
      v[k] = *d;
    }
    MotionRecord r;
    r.t_start = r.t_end = r.t_mid = v[0];
    r.L = v[1];
    r.radial_speed = v[2];
    r.velocity = Vec3(v[3], v[4], v[5]);
    r.omega = Vec3(v[6], v[7], v[8]) * kDegToRad;
    records.push_back(r);
  }
  return records;
}

namespace detail {

struct MeanStd
{
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& v)
{
  MeanStd m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    for (double x : v) m.std += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(m.std / static_cast<double>(v.size() - 1));
  }
  return m;
}

inline nlohmann::json sine_fit_to_json(const std::optional<SineFit>& fit, double unit)
{
  if (!fit) return nullptr;
  return {{"amplitude", fit->amplitude * unit},
          {"angular_frequency_rad_s", fit->angular_frequency},
          {"phase_rad", fit->phase},
          {"offset", fit->offset * unit},
          {"rmse_residual", fit->rmse_residual * unit},
          {"period_s", period_of(*fit)}};
}

}  // namespace detail

/// Aggregates: means and sample standard deviations, sine fits (deg/s) and periods.
inline nlohmann::json motion_summary_json(const MotionEstimate& est)
{
  using detail::mean_std;
  std::vector<double> radial, speed, L;
  std::array<std::vector<double>, 3> vel, w;
  std::vector<double> wnorm;
  Vec3 omega_sum = Vec3::Zero();
  for (const auto& r : est.records) {
    radial.push_back(r.radial_speed);
    speed.push_back(std::abs(r.radial_speed));
    L.push_back(r.L);
    for (std::size_t k = 0; k < 3; ++k) {
      vel[k].push_back(r.velocity[static_cast<Eigen::Index>(k)]);
      w[k].push_back(r.omega[static_cast<Eigen::Index>(k)] * kRadToDeg);
    }
    wnorm.push_back(r.omega.norm() * kRadToDeg);
    omega_sum += r.omega;
  }
  const auto ms = [](const detail::MeanStd& m) { return nlohmann::json{{"mean", m.mean}, {"std", m.std}}; };
  nlohmann::json j;
  j["intervals"] = est.records.size();
  j["scale_c"] = est.scale.scale_c;
  j["scale_provenance"] = est.scale.provenance;
  j["frame"] = frame_to_json(est.frame);
  j["L"] = ms(mean_std(L));
  j["radial_speed_m_s"] = ms(mean_std(radial));
  j["linear_speed_m_s"] = ms(mean_std(speed));
  const char* axes[] = {"x", "y", "z"};
  for (std::size_t k = 0; k < 3; ++k) {
    j["velocity_m_s"][axes[k]] = ms(mean_std(vel[k]));
    j["omega_deg_s"][axes[k]] = ms(mean_std(w[k]));
    j["sine_fits_deg_s"][axes[k]] = detail::sine_fit_to_json(est.omega_fits[k], kRadToDeg);
  }
  j["angular_speed_deg_s"] = ms(mean_std(wnorm));
  j["mean_omega_norm_deg_s"] =
      est.records.empty() ? 0.0 : omega_sum.norm() / static_cast<double>(est.records.size()) * kRadToDeg;
  return j;
}

}  // namespace tumble

#endif  // TUMBLE_MOTION_HPP
