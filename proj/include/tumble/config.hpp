#ifndef TUMBLE_CONFIG_HPP
#define TUMBLE_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tumble/geom.hpp"
#include "tumble/text_io.hpp"

namespace tumble {

/// section -> key -> raw value. Ordered so the effective config prints stably.
using IniData = std::map<std::string, std::map<std::string, std::string>>;

/**
 * @brief Parses `[section]` headers and `key = value` lines.
 *
 * `#` and `;` start comment lines. Keys must sit inside a section and may
 * appear once per section.
 */
inline IniData parse_ini(std::string_view content)
{
  IniData data;
  std::string section;
  const auto lines = text::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = "config line " + std::to_string(i + 1);
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw Error(ErrorKind::Config, where + ": malformed section header");
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      data[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::Config, where + ": expected 'key = value'");
    if (section.empty()) throw Error(ErrorKind::Config, where + ": key outside of any section");
    const std::string key(text::trim(line.substr(0, eq)));
    if (key.empty()) throw Error(ErrorKind::Config, where + ": empty key");
    if (data[section].count(key)) throw Error(ErrorKind::Config, where + ": duplicate key '" + key + "'");
    data[section][key] = std::string(text::trim(line.substr(eq + 1)));
  }
  return data;
}

inline std::string write_ini(const IniData& data)
{
  std::string out;
  for (const auto& [section, keys] : data) {
    if (!out.empty()) out += '\n';
    out += '[' + section + "]\n";
    for (const auto& [key, value] : keys) out += key + " = " + value + '\n';
  }
  return out;
}

/// Applies a `section.key=value` override.
inline void apply_override(IniData& data, std::string_view assignment)
{
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
    throw Error(ErrorKind::Config, "override '" + std::string(assignment) + "' is not of the form section.key=value");
  }
  const std::string section(text::trim(assignment.substr(0, dot)));
  const std::string key(text::trim(assignment.substr(dot + 1, eq - dot - 1)));
  if (section.empty() || key.empty()) throw Error(ErrorKind::Config, "override '" + std::string(assignment) + "' has an empty name");
  data[section][key] = std::string(text::trim(assignment.substr(eq + 1)));
}

namespace detail {

struct KeyDefault
{
  const char* section;
  const char* key;
  const char* value;
};

// An empty value means "unset".
inline constexpr KeyDefault kSimulateDefaults[] = {
    {"simulate", "inertia", "0.47, 0.47, 0.02"},
    {"simulate", "torque", "0, 0, 0"},
    {"simulate", "omega0_deg_s", "0, 0.1, 1.0"},
    {"simulate", "attitude0_wxyz", "1, 0, 0, 0"},
    {"simulate", "position0_m", "0, 0, 0"},
    {"simulate", "velocity0_m_s", "0.0045, 0, 0"},
    {"simulate", "duration_s", "3000"},
    {"simulate", "frames", ""},
    {"simulate", "sample_interval_s", "10"},
    {"simulate", "integrator_dt_s", "0.1"},
    {"simulate", "camera_position_m", "20, 0, 0"},
    {"simulate", "noise_rot_deg", "0"},
    {"simulate", "noise_trans", "0"},
    {"simulate", "model", "cube"},
    {"simulate", "model_edge_m", "0.1"},
    {"simulate", "model_grid", "20"},
    {"simulate", "model_noise_m", "0"},
};

inline constexpr KeyDefault kReconstructionDefaults[] = {
    {"reconstruction", "format", "json"},
    {"reconstruction", "path", ""},
    {"reconstruction", "images", ""},
    {"reconstruction", "points3d", ""},
    {"reconstruction", "timing", ""},
    {"reconstruction", "frame_rate_hz", "30"},
};

inline constexpr KeyDefault kCommonDefaults[] = {
    {"run", "seed", "0"},
    {"output", "dir", "out"},
    {"conditioning", "radius", "0"},
    {"conditioning", "min_neighbors", "3"},
    {"conditioning", "voxel_size", "0"},
    {"conditioning", "ransac_threshold", "0.002"},
    {"conditioning", "ransac_iterations", "1000"},
    {"conditioning", "max_planes", "6"},
    {"conditioning", "min_inlier_fraction", "0.05"},
    {"conditioning", "completion", "none"},
    {"frame", "origin", "centroid"},
    {"frame", "axes", "planes"},
    {"scale", "c", "1"},
    {"scale", "known_length_m", ""},
    {"scale", "point_a", ""},
    {"scale", "point_b", ""},
};

template <std::size_t N>
inline bool is_known(const KeyDefault (&table)[N], const std::string& section, const std::string& key)
{
  for (const auto& d : table) {
    if (section == d.section && key == d.key) return true;
  }
  return false;
}

template <std::size_t N>
inline void fill_defaults(IniData& data, const KeyDefault (&table)[N])
{
  for (const auto& d : table) data[d.section].try_emplace(d.key, d.value);
}

}  // namespace detail

struct SimulateSettings
{
  Vec3 inertia = Vec3(0.47, 0.47, 0.02);
  Vec3 torque = Vec3::Zero();
  Vec3 omega0_deg_s = Vec3(0.0, 0.1, 1.0);
  Rotation attitude0;
  Vec3 position0 = Vec3::Zero();
  Vec3 velocity0 = Vec3(0.0045, 0.0, 0.0);
  double duration_s = 3000.0;
  std::optional<std::size_t> frames;
  double sample_interval_s = 10.0;
  double integrator_dt_s = 0.1;
  Vec3 camera_position = Vec3(20.0, 0.0, 0.0);
  double noise_rot_deg = 0.0;
  double noise_trans = 0.0;
  std::string model = "cube";
  double model_edge_m = 0.1;
  std::size_t model_grid = 20;
  double model_noise_m = 0.0;
};

struct ReconstructionSettings
{
  std::string format = "json";  ///< json | colmap
  std::string path;             ///< json reconstruction
  std::string images;           ///< colmap images.txt
  std::string points3d;         ///< colmap points3D.txt
  std::string timing;           ///< optional name,time_s sidecar
  double frame_rate_hz = 30.0;
};

struct ConditioningSettings
{
  double radius = 0.0;  ///< 0 disables outlier removal
  std::size_t min_neighbors = 3;
  double voxel_size = 0.0;  ///< 0 disables downsampling
  double ransac_threshold = 0.002;
  std::size_t ransac_iterations = 1000;
  std::size_t max_planes = 6;
  double min_inlier_fraction = 0.05;
  std::string completion = "none";  ///< none | cube | cylinder
};

struct FrameSettings
{
  std::optional<Vec3> origin;  ///< unset: centroid of the conditioned cloud
  bool axes_from_planes = true;
};

struct ScaleSettings
{
  double c = 1.0;
  std::optional<double> known_length_m;
  Vec3 point_a = Vec3::Zero();
  Vec3 point_b = Vec3::Zero();
};

struct PipelineConfig
{
  std::variant<std::monostate, SimulateSettings, ReconstructionSettings> source;
  ConditioningSettings conditioning;
  FrameSettings frame;
  ScaleSettings scale;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  IniData effective;  ///< every resolved key, defaults included

  bool simulated() const { return std::holds_alternative<SimulateSettings>(source); }
  bool has_source() const { return !std::holds_alternative<std::monostate>(source); }
};

namespace detail {

class Reader
{
public:
  explicit Reader(const IniData& data) : data_(data) {}

  const std::string& raw(const char* section, const char* key) const { return data_.at(section).at(key); }

  std::string where(const char* section, const char* key) const { return std::string(section) + "." + key; }

  double number(const char* section, const char* key) const
  {
    const auto v = text::to_double(raw(section, key));
    if (!v || !std::isfinite(*v)) throw Error(ErrorKind::Config, where(section, key) + " must be a finite number");
    return *v;
  }

  double positive(const char* section, const char* key) const
  {
    const double v = number(section, key);
    if (!(v > 0.0)) throw Error(ErrorKind::Config, where(section, key) + " must be positive");
    return v;
  }

  double non_negative(const char* section, const char* key) const
  {
    const double v = number(section, key);
    if (v < 0.0) throw Error(ErrorKind::Config, where(section, key) + " must be >= 0");
    return v;
  }

  std::size_t count(const char* section, const char* key) const
  {
    const auto v = text::to_integer(raw(section, key));
    if (!v || *v < 0) throw Error(ErrorKind::Config, where(section, key) + " must be a non-negative integer");
    return static_cast<std::size_t>(*v);
  }

  std::vector<double> list(const char* section, const char* key, std::size_t n) const
  {
    const auto parts = text::split(raw(section, key), ',');
    std::vector<double> out;
    for (const auto p : parts) {
      const auto v = text::to_double(p);
      if (!v || !std::isfinite(*v)) break;
      out.push_back(*v);
    }
    if (out.size() != n || parts.size() != n) {
      throw Error(ErrorKind::Config, where(section, key) + " must be " + std::to_string(n) + " comma-separated numbers");
    }
    return out;
  }

  Vec3 vec3(const char* section, const char* key) const
  {
    const auto v = list(section, key, 3);
    return {v[0], v[1], v[2]};
  }

  bool empty(const char* section, const char* key) const { return raw(section, key).empty(); }

private:
  const IniData& data_;
};

}  // namespace detail

/**
 * @brief Resolves a pipeline configuration.
 *
 * Precedence is overrides > file > built-in defaults. Exactly one of the
 * [simulate] and [reconstruction] sections selects the input source; with
 * `require_source` false neither is needed. Unknown sections or keys are
 * rejected so typos do not pass silently.
 */
inline PipelineConfig resolve_config(IniData data, const std::vector<std::string>& overrides = {},
                                     bool require_source = true)
{
  for (const auto& o : overrides) apply_override(data, o);

  const bool has_sim = data.count("simulate") > 0;
  const bool has_recon = data.count("reconstruction") > 0;
  if (has_sim && has_recon) {
    throw Error(ErrorKind::Config, "both [simulate] and [reconstruction] are given; choose one input source");
  }
  if (require_source && !has_sim && !has_recon) {
    throw Error(ErrorKind::Config, "no input source; add a [simulate] or [reconstruction] section");
  }
  for (const auto& [section, keys] : data) {
    for (const auto& [key, value] : keys) {
      (void)value;
      if (!detail::is_known(detail::kSimulateDefaults, section, key) &&
          !detail::is_known(detail::kReconstructionDefaults, section, key) &&
          !detail::is_known(detail::kCommonDefaults, section, key)) {
        throw Error(ErrorKind::Config, "unknown setting '" + section + "." + key + "'");
      }
    }
  }
  if (has_sim) detail::fill_defaults(data, detail::kSimulateDefaults);
  if (has_recon) detail::fill_defaults(data, detail::kReconstructionDefaults);
  detail::fill_defaults(data, detail::kCommonDefaults);

  const detail::Reader r(data);
  PipelineConfig cfg;
  if (has_sim) {
    SimulateSettings s;
    s.inertia = r.vec3("simulate", "inertia");
    s.torque = r.vec3("simulate", "torque");
    s.omega0_deg_s = r.vec3("simulate", "omega0_deg_s");
    const auto q = r.list("simulate", "attitude0_wxyz", 4);
    try {
      s.attitude0 = Rotation::from_quaternion(q[0], q[1], q[2], q[3]);
    } catch (const Error&) {
      throw Error(ErrorKind::Config, "simulate.attitude0_wxyz must be a non-zero quaternion");
    }
    s.position0 = r.vec3("simulate", "position0_m");
    s.velocity0 = r.vec3("simulate", "velocity0_m_s");
    s.duration_s = r.non_negative("simulate", "duration_s");
    if (!r.empty("simulate", "frames")) s.frames = r.count("simulate", "frames");
    s.sample_interval_s = r.positive("simulate", "sample_interval_s");
    s.integrator_dt_s = r.positive("simulate", "integrator_dt_s");
    s.camera_position = r.vec3("simulate", "camera_position_m");
    s.noise_rot_deg = r.non_negative("simulate", "noise_rot_deg");
    s.noise_trans = r.non_negative("simulate", "noise_trans");
    s.model = r.raw("simulate", "model");
    if (s.model != "cube" && s.model != "none") throw Error(ErrorKind::Config, "simulate.model must be cube or none");
    s.model_edge_m = r.positive("simulate", "model_edge_m");
    s.model_grid = r.count("simulate", "model_grid");
    if (s.model_grid < 2) throw Error(ErrorKind::Config, "simulate.model_grid must be >= 2");
    s.model_noise_m = r.non_negative("simulate", "model_noise_m");
    cfg.source = s;
  } else if (has_recon) {
    ReconstructionSettings s;
    s.format = r.raw("reconstruction", "format");
    s.path = r.raw("reconstruction", "path");
    s.images = r.raw("reconstruction", "images");
    s.points3d = r.raw("reconstruction", "points3d");
    s.timing = r.raw("reconstruction", "timing");
    s.frame_rate_hz = r.positive("reconstruction", "frame_rate_hz");
    if (s.format == "json") {
      if (s.path.empty()) throw Error(ErrorKind::Config, "reconstruction.path is required for format json");
    } else if (s.format == "colmap") {
      if (s.images.empty() || s.points3d.empty()) {
        throw Error(ErrorKind::Config, "reconstruction.images and reconstruction.points3d are required for format colmap");
      }
    } else {
      throw Error(ErrorKind::Config, "reconstruction.format must be json or colmap");
    }
    cfg.source = s;
  }

  auto& c = cfg.conditioning;
  c.radius = r.non_negative("conditioning", "radius");
  c.min_neighbors = r.count("conditioning", "min_neighbors");
  if (c.radius > 0.0 && c.min_neighbors < 1) throw Error(ErrorKind::Config, "conditioning.min_neighbors must be >= 1");
  c.voxel_size = r.non_negative("conditioning", "voxel_size");
  c.ransac_threshold = r.positive("conditioning", "ransac_threshold");
  c.ransac_iterations = r.count("conditioning", "ransac_iterations");
  if (c.ransac_iterations < 1) throw Error(ErrorKind::Config, "conditioning.ransac_iterations must be >= 1");
  c.max_planes = r.count("conditioning", "max_planes");
  c.min_inlier_fraction = r.non_negative("conditioning", "min_inlier_fraction");
  if (c.min_inlier_fraction > 1.0) throw Error(ErrorKind::Config, "conditioning.min_inlier_fraction must be <= 1");
  c.completion = r.raw("conditioning", "completion");
  if (c.completion != "none" && c.completion != "cube" && c.completion != "cylinder") {
    throw Error(ErrorKind::Config, "conditioning.completion must be none, cube or cylinder");
  }

  if (r.raw("frame", "origin") != "centroid") cfg.frame.origin = r.vec3("frame", "origin");
  const std::string& axes = r.raw("frame", "axes");
  if (axes != "planes" && axes != "world") throw Error(ErrorKind::Config, "frame.axes must be planes or world");
  cfg.frame.axes_from_planes = axes == "planes";

  cfg.scale.c = r.positive("scale", "c");
  if (!r.empty("scale", "known_length_m")) {
    cfg.scale.known_length_m = r.positive("scale", "known_length_m");
    cfg.scale.point_a = r.vec3("scale", "point_a");
    cfg.scale.point_b = r.vec3("scale", "point_b");
  }

  cfg.output_dir = r.raw("output", "dir");
  if (cfg.output_dir.empty()) throw Error(ErrorKind::Config, "output.dir must not be empty");
  const auto seed = text::to_integer(r.raw("run", "seed"));
  if (!seed || *seed < 0) throw Error(ErrorKind::Config, "run.seed must be a non-negative integer");
  cfg.seed = static_cast<std::uint64_t>(*seed);
  cfg.effective = std::move(data);
  return cfg;
}

inline PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {},
                                  bool require_source = true)
{
  return resolve_config(parse_ini(text::read_file(path)), overrides, require_source);
}

}  // namespace tumble

#endif  // TUMBLE_CONFIG_HPP
