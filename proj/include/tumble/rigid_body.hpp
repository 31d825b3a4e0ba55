#ifndef TUMBLE_RIGID_BODY_HPP
#define TUMBLE_RIGID_BODY_HPP

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tumble/geom.hpp"
#include "tumble/text_io.hpp"
#include "tumble/trajectory.hpp"

namespace tumble {

/// Principal moments of inertia (kg m^2) and a constant body-frame torque.
class InertiaModel
{
public:
  InertiaModel(double ixx, double iyy, double izz, const Vec3& torque = Vec3::Zero())
    : moments_(ixx, iyy, izz), torque_(torque)
  {
    require(moments_.allFinite() && moments_.minCoeff() > 0.0, ErrorKind::InvalidArgument,
            "principal moments must be positive");
    require(is_finite(torque_), ErrorKind::InvalidArgument, "torque must be finite");
    const double tol = 1e-12 * moments_.sum();
    require(ixx + iyy >= izz - tol && iyy + izz >= ixx - tol && izz + ixx >= iyy - tol,
            ErrorKind::InvalidArgument, "principal moments violate the triangle inequality");
  }

  const Vec3& moments() const { return moments_; }
  const Vec3& torque() const { return torque_; }

  double kinetic_energy(const Vec3& omega) const { return 0.5 * omega.dot(moments_.cwiseProduct(omega)); }
  Vec3 angular_momentum(const Vec3& omega) const { return moments_.cwiseProduct(omega); }

private:
  Vec3 moments_;
  Vec3 torque_;
};

struct RigidBodyState
{
  Rotation attitude;                   ///< body to inertial
  Vec3 omega = Vec3::Zero();           ///< body frame, rad/s
  Vec3 position = Vec3::Zero();        ///< inertial, m
  Vec3 velocity = Vec3::Zero();        ///< inertial, m/s
  double time = 0.0;
};

/// Body-frame angular acceleration from Euler's equations, I w' = N - w x (I w).
inline Vec3 euler_derivative(const Vec3& omega, const InertiaModel& inertia)
{
  const Vec3 h = inertia.angular_momentum(omega);
  return (inertia.torque() - omega.cross(h)).cwiseQuotient(inertia.moments());
}

inline Vec3 euler_derivative(const RigidBodyState& state, const InertiaModel& inertia)
{
  return euler_derivative(state.omega, inertia);
}

namespace detail {

inline Eigen::Vector4d quaternion_rate(const Eigen::Vector4d& q, const Vec3& w)
{
  // q = (w, x, y, z); q' = 1/2 q (x) (0, omega)
  Eigen::Vector4d d;
  d[0] = -0.5 * (q[1] * w.x() + q[2] * w.y() + q[3] * w.z());
  d[1] = 0.5 * (q[0] * w.x() + q[2] * w.z() - q[3] * w.y());
  d[2] = 0.5 * (q[0] * w.y() + q[3] * w.x() - q[1] * w.z());
  d[3] = 0.5 * (q[0] * w.z() + q[1] * w.y() - q[2] * w.x());
  return d;
}

}  // namespace detail

/**
 * @brief One classical Runge-Kutta step of the coupled attitude and Euler
 * dynamics.
 *
 * The quaternion is integrated alongside omega and renormalized at the
 * end of the step. Linear motion is force-free: position += velocity dt.
 */
inline RigidBodyState rk4_step(const RigidBodyState& state, const InertiaModel& inertia, double dt)
{
  require(std::isfinite(dt) && dt > 0.0, ErrorKind::InvalidArgument, "step must be positive");
  const auto& q0 = state.attitude.quaternion();
  const Eigen::Vector4d q(q0.w(), q0.x(), q0.y(), q0.z());
  const Vec3& w = state.omega;

  const Vec3 kw1 = euler_derivative(w, inertia);
  const Eigen::Vector4d kq1 = detail::quaternion_rate(q, w);
  const Vec3 w2 = w + 0.5 * dt * kw1;
  const Eigen::Vector4d q2 = q + 0.5 * dt * kq1;
  const Vec3 kw2 = euler_derivative(w2, inertia);
  const Eigen::Vector4d kq2 = detail::quaternion_rate(q2, w2);
  const Vec3 w3 = w + 0.5 * dt * kw2;
  const Eigen::Vector4d q3 = q + 0.5 * dt * kq2;
  const Vec3 kw3 = euler_derivative(w3, inertia);
  const Eigen::Vector4d kq3 = detail::quaternion_rate(q3, w3);
  const Vec3 w4 = w + dt * kw3;
  const Eigen::Vector4d q4 = q + dt * kq3;
  const Vec3 kw4 = euler_derivative(w4, inertia);
  const Eigen::Vector4d kq4 = detail::quaternion_rate(q4, w4);

  RigidBodyState next = state;
  next.omega = w + dt / 6.0 * (kw1 + 2.0 * kw2 + 2.0 * kw3 + kw4);
  const Eigen::Vector4d qn = q + dt / 6.0 * (kq1 + 2.0 * kq2 + 2.0 * kq3 + kq4);
  next.attitude = Rotation::from_quaternion(qn[0], qn[1], qn[2], qn[3]);
  next.position = state.position + state.velocity * dt;
  next.time = state.time + dt;
  return next;
}

/// Advances `state` by `span` seconds using equal substeps no longer than `max_dt`.
inline RigidBodyState propagate(RigidBodyState state, const InertiaModel& inertia, double span, double max_dt)
{
  if (span <= 0.0) return state;
  const auto steps = static_cast<long>(std::ceil(span / max_dt - 1e-9));
  const double h = span / static_cast<double>(std::max(1L, steps));
  const double t_end = state.time + span;
  for (long k = 0; k < std::max(1L, steps); ++k) state = rk4_step(state, inertia, h);
  state.time = t_end;
  return state;
}

struct SimConfig
{
  RigidBodyState initial;
  InertiaModel inertia{1.0, 1.0, 1.0};
  double duration = 0.0;
  double integrator_dt = 0.1;
  double sample_interval = 1.0;
  Vec3 camera_position_inertial = Vec3(20.0, 0.0, 0.0);
  /// When set, overrides `duration` as (frames - 1) * sample_interval.
  std::optional<std::size_t> frames;

  double effective_duration() const
  {
    return frames ? static_cast<double>(*frames - 1) * sample_interval : duration;
  }
};

inline void validate(const SimConfig& config)
{
  require(!config.frames || *config.frames >= 1, ErrorKind::InvalidArgument, "frames must be >= 1");
  const double duration = config.effective_duration();
  require(std::isfinite(config.integrator_dt) && config.integrator_dt > 0.0, ErrorKind::InvalidArgument,
          "integrator_dt must be positive");
  require(std::isfinite(config.sample_interval) && config.integrator_dt <= config.sample_interval,
          ErrorKind::InvalidArgument, "integrator_dt must not exceed sample_interval");
  require(std::isfinite(duration) && (config.sample_interval <= duration || (config.frames && *config.frames == 1)),
          ErrorKind::InvalidArgument, "sample_interval must not exceed duration");
  require(is_finite(config.initial.omega) && is_finite(config.initial.position) &&
              is_finite(config.initial.velocity) && is_finite(config.camera_position_inertial),
          ErrorKind::InvalidArgument, "initial state must be finite");
}

/**
 * @brief Integrates the configured motion and returns states sampled every
 * `sample_interval` seconds, t = 0 included.
 *
 * Sample count is floor(duration / sample_interval) + 1. Sample times are
 * computed as k * sample_interval, not accumulated.
 */
inline std::vector<RigidBodyState> simulate(const SimConfig& config)
{
  validate(config);
  const double duration = config.effective_duration();
  const auto count = static_cast<std::size_t>(std::floor(duration / config.sample_interval + 1e-9)) + 1;
  std::vector<RigidBodyState> samples;
  samples.reserve(count);
  RigidBodyState state = config.initial;
  state.time = 0.0;
  samples.push_back(state);
  for (std::size_t k = 1; k < count; ++k) {
    const double t = static_cast<double>(k) * config.sample_interval;
    bool finite = true;
    try {
      state = propagate(state, config.inertia, t - state.time, config.integrator_dt);
    } catch (const Error&) {
      finite = false;  // quaternion blew up
    }
    state.time = t;
    if (!finite || !is_finite(state.omega) || !is_finite(state.position)) {
      throw Error(ErrorKind::Numerical, "integration became non-finite at t = " + text::fmt9(t) +
                                            " s; reduce integrator_dt");
    }
    samples.push_back(state);
  }
  return samples;
}

/**
 * @brief Orientation of a camera at `camera_position` looking at `target`
 * (inertial to camera, OpenCV axes: z forward, y down).
 */
inline Rotation look_at(const Vec3& camera_position, const Vec3& target, const Vec3& up = Vec3::UnitZ())
{
  const Vec3 forward = (target - camera_position).normalized();
  Vec3 reference = up;
  if (line_angle(forward, reference) < 1e-3) reference = Vec3::UnitY();
  const Vec3 right = forward.cross(reference).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 rows;
  rows.row(0) = right.transpose();
  rows.row(1) = down.transpose();
  rows.row(2) = forward.transpose();
  return Rotation::from_matrix(rows);
}

/**
 * @brief Expresses a static inertial camera in the body-fixed frame for
 * each state, which is the trajectory a noiseless SfM run would output.
 *
 * With body-to-inertial attitude A and inertial camera orientation C the
 * emitted pose has rotation C A and center A^T (camera - position).
 */
inline PoseTrajectory to_camera_trajectory(const std::vector<RigidBodyState>& states, const Vec3& camera_position,
                                           const std::optional<Rotation>& camera_orientation = std::nullopt)
{
  require(!states.empty(), ErrorKind::EmptyInput, "no states to convert");
  const Rotation cam = camera_orientation ? *camera_orientation : look_at(camera_position, states.front().position);
  PoseTrajectory traj;
  traj.frame_tag = FrameTag::Metric;
  traj.source = "simulation";
  for (const auto& s : states) {
    traj.poses.push_back(Pose{cam * s.attitude, s.attitude.inverse() * (camera_position - s.position), s.time});
  }
  return traj;
}

/**
 * @brief Perturbs every pose by a random rotation (uniform axis, angle ~
 * N(0, sigma_rot)) applied on the camera side and an isotropic Gaussian
 * center offset. Deterministic for a given seed.
 */
inline PoseTrajectory inject_pose_noise(PoseTrajectory traj, double sigma_rot_deg, double sigma_trans, std::uint64_t seed)
{
  require(sigma_rot_deg >= 0.0 && sigma_trans >= 0.0, ErrorKind::InvalidArgument, "noise sigmas must be >= 0");
  if (sigma_rot_deg == 0.0 && sigma_trans == 0.0) return traj;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Pose& pose : traj.poses) {
    Vec3 axis;
    do {
      axis = Vec3(gauss(rng), gauss(rng), gauss(rng));
    } while (axis.norm() < 1e-12);
    const double angle = sigma_rot_deg * kDegToRad * gauss(rng);
    const Vec3 offset(gauss(rng), gauss(rng), gauss(rng));
    if (sigma_rot_deg > 0.0) pose.rotation = so3_exp(angle * axis.normalized()) * pose.rotation;
    if (sigma_trans > 0.0) pose.center += sigma_trans * offset;
  }
  traj.source += "+noise";
  return traj;
}

inline constexpr std::string_view kTruthCsvHeader =
    "time_s,qw,qx,qy,qz,wx_rad_s,wy_rad_s,wz_rad_s,px_m,py_m,pz_m,vx_m_s,vy_m_s,vz_m_s";

/// Ground-truth CSV; attitude is the body-to-inertial quaternion.
inline std::string write_truth_csv(const std::vector<RigidBodyState>& states)
{
  std::string out(kTruthCsvHeader);
  out += '\n';
  for (const auto& s : states) {
    const auto& q = s.attitude.quaternion();
    const double v[] = {s.time,       q.w(),        q.x(),        q.y(),        q.z(),
                        s.omega.x(),  s.omega.y(),  s.omega.z(),  s.position.x(), s.position.y(),
                        s.position.z(), s.velocity.x(), s.velocity.y(), s.velocity.z()};
    for (std::size_t i = 0; i < 14; ++i) {
      if (i) out += ',';
      out += text::fmt9(v[i]);
    }
    out += '\n';
  }
  return out;
}

inline std::vector<RigidBodyState> read_truth_csv(std::string_view content)
{
  const auto lines = text::split_lines(content);
  if (lines.empty() || text::trim(lines[0]) != kTruthCsvHeader) {
    throw Error(ErrorKind::Schema, "truth CSV must start with header '" + std::string(kTruthCsvHeader) + "'");
  }
  std::vector<RigidBodyState> states;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto fields = text::split(lines[i], ',');
    if (fields.size() != 14) throw Error(ErrorKind::Parse, "truth line " + std::to_string(i + 1) + ": expected 14 fields");
    double v[14];
    for (std::size_t k = 0; k < 14; ++k) {
      const auto d = text::to_double(fields[k]);
      if (!d || !std::isfinite(*d)) throw Error(ErrorKind::Parse, "truth line " + std::to_string(i + 1) + ": bad number");
      v[k] = *d;
    }
    RigidBodyState s;
    s.time = v[0];
    s.attitude = Rotation::from_quaternion(v[1], v[2], v[3], v[4]);
    s.omega = Vec3(v[5], v[6], v[7]);
    s.position = Vec3(v[8], v[9], v[10]);
    s.velocity = Vec3(v[11], v[12], v[13]);
    if (!states.empty() && !(s.time > states.back().time)) {
      throw Error(ErrorKind::Parse, "truth line " + std::to_string(i + 1) + ": time must increase");
    }
    states.push_back(s);
  }
  return states;
}

}  // namespace tumble

#endif  // TUMBLE_RIGID_BODY_HPP
