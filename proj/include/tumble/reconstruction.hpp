#ifndef TUMBLE_RECONSTRUCTION_HPP
#define TUMBLE_RECONSTRUCTION_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tumble/point_cloud.hpp"
#include "tumble/text_io.hpp"
#include "tumble/trajectory.hpp"

namespace tumble {

/// Per-frame count of features that the SfM solver matched into tracks.
struct FeatureReport
{
  struct Frame
  {
    std::string frame_id;
    double timestamp = 0.0;
    std::size_t feature_count = 0;
  };
  std::vector<Frame> frames;
};

inline std::string write_feature_csv(const FeatureReport& report)
{
  std::string out = "frame_id,time_s,feature_count\n";
  for (const auto& f : report.frames) {
    out += f.frame_id + ',' + text::fmt9(f.timestamp) + ',' + std::to_string(f.feature_count) + '\n';
  }
  return out;
}

/// Everything ingested from one SfM output.
struct Reconstruction
{
  PoseTrajectory trajectory;
  PointCloud cloud;
  std::optional<FeatureReport> features;
  std::vector<std::string> image_names;  ///< parallel to trajectory.poses
  LoadStats stats;
};

/// How shots are put on a time axis. With `timing` set every shot must be
/// listed there; otherwise shots are sorted by image name and spaced at
/// 1 / frame_rate_hz.
struct TimingOptions
{
  std::optional<std::map<std::string, double>> timing;
  double frame_rate_hz = 1.0;
};

/// Timing sidecar: `image_name,time_s` per line, optional header and `#` comments.
inline std::map<std::string, double> parse_timing_csv(std::string_view content)
{
  std::map<std::string, double> timing;
  const auto lines = text::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != 2) {
      throw Error(ErrorKind::Parse, "timing line " + std::to_string(i + 1) + ": expected 2 fields");
    }
    const auto t = text::to_double(fields[1]);
    if (!t) {
      if (timing.empty() && fields[1] == "time_s") continue;  // header
      throw Error(ErrorKind::Parse, "timing line " + std::to_string(i + 1) + ": bad time");
    }
    if (!std::isfinite(*t) || *t < 0.0) {
      throw Error(ErrorKind::Parse, "timing line " + std::to_string(i + 1) + ": time must be finite and >= 0");
    }
    timing[std::string(fields[0])] = *t;
  }
  return timing;
}

namespace detail {

struct RawShot
{
  std::string name;
  Rotation rotation;
  Vec3 translation;
  std::optional<std::size_t> feature_count;
};

inline Reconstruction assemble(std::vector<RawShot> shots, PointCloud cloud, LoadStats stats,
                               const TimingOptions& timing, std::string source)
{
  require(std::isfinite(timing.frame_rate_hz) && timing.frame_rate_hz > 0.0, ErrorKind::InvalidArgument,
          "frame rate must be positive");
  if (shots.empty()) throw Error(ErrorKind::EmptyInput, "reconstruction contains no shots");

  std::vector<double> times(shots.size());
  if (timing.timing) {
    for (std::size_t i = 0; i < shots.size(); ++i) {
      const auto it = timing.timing->find(shots[i].name);
      if (it == timing.timing->end()) {
        throw Error(ErrorKind::Schema, "timing sidecar has no entry for shot '" + shots[i].name + "'");
      }
      times[i] = it->second;
    }
    std::vector<std::size_t> order(shots.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
    std::vector<RawShot> sorted_shots;
    std::vector<double> sorted_times;
    for (std::size_t i : order) {
      sorted_shots.push_back(std::move(shots[i]));
      sorted_times.push_back(times[i]);
    }
    shots = std::move(sorted_shots);
    times = std::move(sorted_times);
  } else {
    std::stable_sort(shots.begin(), shots.end(), [](const RawShot& a, const RawShot& b) { return a.name < b.name; });
    for (std::size_t i = 0; i < shots.size(); ++i) times[i] = static_cast<double>(i) / timing.frame_rate_hz;
  }

  Reconstruction rec;
  rec.trajectory.source = std::move(source);
  rec.trajectory.frame_tag = FrameTag::SfmGauge;
  const bool have_counts = std::all_of(shots.begin(), shots.end(), [](const RawShot& s) { return s.feature_count.has_value(); });
  if (have_counts) rec.features.emplace();
  for (std::size_t i = 0; i < shots.size(); ++i) {
    Pose pose = Pose::from_rotation_translation(shots[i].rotation, shots[i].translation, times[i]);
    if (!is_finite(pose.center)) throw Error(ErrorKind::Schema, "shot '" + shots[i].name + "' has a non-finite pose");
    rec.trajectory.poses.push_back(pose);
    rec.image_names.push_back(shots[i].name);
    if (have_counts) rec.features->frames.push_back({shots[i].name, times[i], *shots[i].feature_count});
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw Error(ErrorKind::Schema, "shots '" + rec.image_names[i - 1] + "' and '" + rec.image_names[i] +
                                         "' share a timestamp");
    }
  }
  rec.cloud = std::move(cloud);
  rec.stats = stats;
  return rec;
}

inline Vec3 json_vec3(const nlohmann::json& obj, const char* field, const std::string& context)
{
  const auto it = obj.find(field);
  if (it == obj.end()) throw Error(ErrorKind::Schema, context + ": missing required field '" + field + "'");
  if (!it->is_array() || it->size() != 3) {
    throw Error(ErrorKind::Schema, context + ": field '" + field + "' must be an array of 3 numbers");
  }
  Vec3 v;
  for (int k = 0; k < 3; ++k) {
    const auto& e = (*it)[static_cast<std::size_t>(k)];
    if (!e.is_number()) throw Error(ErrorKind::Schema, context + ": field '" + field + "' must hold numbers");
    v[k] = e.get<double>();
  }
  return v;
}

}  // namespace detail

/**
 * @brief Parses an OpenSfM-style `reconstruction.json`.
 *
 * The top level is an array of reconstructions; only the one with the most
 * shots is used. Per shot, `rotation` (axis-angle, world to camera) and
 * `translation` are required and the camera center is c = -R^T t. Each
 * point needs `coordinates`; `color` is optional. An optional integer
 * `num_observations` on every shot produces a FeatureReport. The complete
 * accepted subset is documented in docs/formats.md.
 */
inline Reconstruction parse_reconstruction_json(std::string_view content, const TimingOptions& timing = {})
{
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(content.begin(), content.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed JSON: ") + e.what());
  }
  try {
    if (!doc.is_array()) throw Error(ErrorKind::Schema, "top level must be an array of reconstructions");
    if (doc.empty()) throw Error(ErrorKind::EmptyInput, "no reconstructions in file");

    const nlohmann::json* best = nullptr;
    std::size_t best_shots = 0;
    for (std::size_t r = 0; r < doc.size(); ++r) {
      const auto& rec = doc[r];
      const std::string ctx = "reconstruction[" + std::to_string(r) + "]";
      if (!rec.is_object()) throw Error(ErrorKind::Schema, ctx + " must be an object");
      const auto shots = rec.find("shots");
      if (shots == rec.end()) throw Error(ErrorKind::Schema, ctx + ": missing required field 'shots'");
      if (!shots->is_object()) throw Error(ErrorKind::Schema, ctx + ": field 'shots' must be an object");
      if (best == nullptr || shots->size() > best_shots) {
        best = &rec;
        best_shots = shots->size();
      }
    }

    std::vector<detail::RawShot> raw;
    for (const auto& [name, shot] : best->at("shots").items()) {
      const std::string ctx = "shot '" + name + "'";
      if (!shot.is_object()) throw Error(ErrorKind::Schema, ctx + " must be an object");
      const Vec3 axis_angle = detail::json_vec3(shot, "rotation", ctx);
      const Vec3 t = detail::json_vec3(shot, "translation", ctx);
      if (!is_finite(axis_angle) || !is_finite(t)) throw Error(ErrorKind::Schema, ctx + ": non-finite pose values");
      detail::RawShot s{name, so3_exp(axis_angle), t, std::nullopt};
      if (const auto obs = shot.find("num_observations"); obs != shot.end()) {
        if (!obs->is_number_integer() || obs->get<long long>() < 0) {
          throw Error(ErrorKind::Schema, ctx + ": 'num_observations' must be a non-negative integer");
        }
        s.feature_count = static_cast<std::size_t>(obs->get<long long>());
      }
      raw.push_back(std::move(s));
    }

    PointCloud cloud;
    LoadStats stats;
    if (const auto points = best->find("points"); points != best->end()) {
      if (!points->is_object()) throw Error(ErrorKind::Schema, "field 'points' must be an object");
      bool first = true;
      bool with_color = false;
      for (const auto& [id, pt] : points->items()) {
        const std::string ctx = "point '" + id + "'";
        if (!pt.is_object()) throw Error(ErrorKind::Schema, ctx + " must be an object");
        const Vec3 xyz = detail::json_vec3(pt, "coordinates", ctx);
        const bool has_color = pt.contains("color");
        if (first) with_color = has_color;
        first = false;
        if (has_color != with_color) throw Error(ErrorKind::Schema, ctx + ": 'color' must be present on all points or none");
        Color c{};
        if (has_color) {
          const Vec3 rgb = detail::json_vec3(pt, "color", ctx);
          for (int k = 0; k < 3; ++k) {
            if (!(rgb[k] >= 0.0 && rgb[k] <= 255.0)) throw Error(ErrorKind::Schema, ctx + ": colour out of range");
            c[k] = static_cast<std::uint8_t>(std::lround(rgb[k]));
          }
        }
        if (!is_finite(xyz)) {
          ++stats.dropped_nonfinite;
          continue;
        }
        cloud.points.push_back(xyz);
        if (has_color) cloud.colors.push_back(c);
      }
    }
    return detail::assemble(std::move(raw), std::move(cloud), stats, timing, "reconstruction.json");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("unexpected JSON structure: ") + e.what());
  }
}

/**
 * @brief Parses the COLMAP text export (images.txt + points3D.txt).
 *
 * images.txt alternates an image line
 *   IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME
 * with a keypoint line of (X Y POINT3D_ID) triples; the number of triples
 * whose POINT3D_ID is not -1 is the frame's feature count. points3D.txt has
 *   POINT3D_ID X Y Z R G B ERROR (IMAGE_ID POINT2D_IDX)*
 * and the number of pairs is stored as the point's track length.
 */
inline Reconstruction parse_colmap_text(std::string_view images_text, std::string_view points3d_text,
                                        const TimingOptions& timing = {})
{
  std::vector<detail::RawShot> raw;
  const auto image_lines = text::split_lines(images_text);
  bool expect_keypoints = false;
  for (std::size_t i = 0; i < image_lines.size(); ++i) {
    const auto line = text::trim(image_lines[i]);
    if (!line.empty() && line.front() == '#') continue;
    const auto tokens = text::split_whitespace(line);
    const std::string where = "images.txt line " + std::to_string(i + 1);
    if (expect_keypoints) {
      expect_keypoints = false;
      if (tokens.size() % 3 != 0) throw Error(ErrorKind::Parse, where + ": keypoint tokens must come in triples");
      std::size_t matched = 0;
      for (std::size_t k = 0; k < tokens.size(); k += 3) {
        const auto x = text::to_double(tokens[k]);
        const auto y = text::to_double(tokens[k + 1]);
        const auto id = text::to_integer(tokens[k + 2]);
        if (!x || !y || !id) throw Error(ErrorKind::Parse, where + ": bad keypoint triple");
        if (*id != -1) ++matched;
      }
      raw.back().feature_count = matched;
      continue;
    }
    if (tokens.empty()) continue;
    if (tokens.size() != 10) {
      throw Error(ErrorKind::Parse, where + ": expected 10 tokens, got " + std::to_string(tokens.size()));
    }
    double v[7];
    for (int k = 0; k < 7; ++k) {
      const auto d = text::to_double(tokens[static_cast<std::size_t>(k) + 1]);
      if (!d || !std::isfinite(*d)) throw Error(ErrorKind::Parse, where + ": bad number");
      v[k] = *d;
    }
    if (!text::to_integer(tokens[0]) || !text::to_integer(tokens[8])) {
      throw Error(ErrorKind::Parse, where + ": image and camera ids must be integers");
    }
    if (std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2]) + std::abs(v[3]) == 0.0) {
      throw Error(ErrorKind::Parse, where + ": zero quaternion");
    }
    raw.push_back({std::string(tokens[9]), Rotation::from_quaternion(v[0], v[1], v[2], v[3]),
                   Vec3(v[4], v[5], v[6]), std::nullopt});
    expect_keypoints = true;
  }
  if (raw.empty()) throw Error(ErrorKind::EmptyInput, "images.txt lists no images");

  PointCloud cloud;
  LoadStats stats;
  const auto point_lines = text::split_lines(points3d_text);
  for (std::size_t i = 0; i < point_lines.size(); ++i) {
    const auto line = text::trim(point_lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto tokens = text::split_whitespace(line);
    const std::string where = "points3D.txt line " + std::to_string(i + 1);
    if (tokens.size() < 8 || (tokens.size() - 8) % 2 != 0) {
      throw Error(ErrorKind::Parse, where + ": expected 8 + 2k tokens, got " + std::to_string(tokens.size()));
    }
    double v[7];
    for (int k = 0; k < 7; ++k) {
      const auto d = text::to_double(tokens[static_cast<std::size_t>(k) + 1]);
      if (!d) throw Error(ErrorKind::Parse, where + ": bad number");
      v[k] = *d;
    }
    Color c{};
    for (int k = 0; k < 3; ++k) {
      if (!(v[3 + k] >= 0.0 && v[3 + k] <= 255.0)) throw Error(ErrorKind::Parse, where + ": colour out of range");
      c[k] = static_cast<std::uint8_t>(std::lround(v[3 + k]));
    }
    const Vec3 xyz(v[0], v[1], v[2]);
    if (!is_finite(xyz)) {
      ++stats.dropped_nonfinite;
      continue;
    }
    cloud.points.push_back(xyz);
    cloud.colors.push_back(c);
    cloud.track_lengths.push_back(static_cast<std::uint32_t>((tokens.size() - 8) / 2));
  }
  return detail::assemble(std::move(raw), std::move(cloud), stats, timing, "colmap-text");
}

}  // namespace tumble

#endif  // TUMBLE_RECONSTRUCTION_HPP
