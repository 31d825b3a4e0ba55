#ifndef TUMBLE_TRAJECTORY_HPP
#define TUMBLE_TRAJECTORY_HPP

#include <string>
#include <string_view>
#include <vector>

#include "tumble/geom.hpp"
#include "tumble/text_io.hpp"

namespace tumble {

enum class FrameTag { SfmGauge, Metric };

/// Time-ordered camera poses expressed in the target-fixed world frame.
struct PoseTrajectory
{
  std::vector<Pose> poses;
  FrameTag frame_tag = FrameTag::SfmGauge;
  std::string source;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
};

/// Checks per-pose invariants and strictly increasing timestamps.
inline void validate(const PoseTrajectory& traj)
{
  for (std::size_t i = 0; i < traj.poses.size(); ++i) {
    validate(traj.poses[i]);
    if (i > 0 && !(traj.poses[i].timestamp > traj.poses[i - 1].timestamp)) {
      throw Error(ErrorKind::InvalidArgument,
                  "timestamps must be strictly increasing (pose " + std::to_string(i) + ")");
    }
  }
}

/// Overwrites timestamps with index / frame_rate_hz, keeping pose order.
inline PoseTrajectory assign_timestamps(PoseTrajectory traj, double frame_rate_hz)
{
  require(std::isfinite(frame_rate_hz) && frame_rate_hz > 0.0, ErrorKind::InvalidArgument,
          "frame rate must be positive");
  for (std::size_t i = 0; i < traj.poses.size(); ++i) {
    traj.poses[i].timestamp = static_cast<double>(i) / frame_rate_hz;
  }
  return traj;
}

inline constexpr std::string_view kTrajectoryCsvHeader = "time_s,qw,qx,qy,qz,cx,cy,cz";

/// Internal trajectory CSV: header row, then one pose per line with the
/// world-to-camera quaternion (w >= 0) and the camera center.
inline std::string write_trajectory_csv(const PoseTrajectory& traj)
{
  std::string out(kTrajectoryCsvHeader);
  out += '\n';
  for (const Pose& p : traj.poses) {
    const auto& q = p.rotation.quaternion();
    const double values[] = {p.timestamp, q.w(), q.x(), q.y(), q.z(), p.center.x(), p.center.y(),
                             p.center.z()};
    for (std::size_t i = 0; i < 8; ++i) {
      if (i) out += ',';
      out += text::fmt9(values[i]);
    }
    out += '\n';
  }
  return out;
}

inline PoseTrajectory read_trajectory_csv(std::string_view content, std::string source = {})
{
  const auto lines = text::split_lines(content);
  std::size_t i = 0;
  while (i < lines.size() && (text::trim(lines[i]).empty() || lines[i].front() == '#')) ++i;
  if (i == lines.size() || text::trim(lines[i]) != kTrajectoryCsvHeader) {
    throw Error(ErrorKind::Schema, "trajectory CSV must start with header '" +
                                       std::string(kTrajectoryCsvHeader) + "'");
  }
  PoseTrajectory traj;
  traj.source = std::move(source);
  for (++i; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != 8) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(i + 1) + ": expected 8 fields");
    }
    double v[8];
    for (std::size_t k = 0; k < 8; ++k) {
      const auto d = text::to_double(fields[k]);
      if (!d || !std::isfinite(*d)) {
        throw Error(ErrorKind::Parse, "line " + std::to_string(i + 1) + ": bad number '" +
                                          std::string(fields[k]) + "'");
      }
      v[k] = *d;
    }
    Pose pose{Rotation::from_quaternion(v[1], v[2], v[3], v[4]), Vec3(v[5], v[6], v[7]), v[0]};
    validate(pose);
    traj.poses.push_back(pose);
  }
  validate(traj);
  return traj;
}

}  // namespace tumble

#endif  // TUMBLE_TRAJECTORY_HPP
