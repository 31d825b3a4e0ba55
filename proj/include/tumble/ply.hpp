#ifndef TUMBLE_PLY_HPP
#define TUMBLE_PLY_HPP

#include <string>
#include <string_view>
#include <vector>

#include "tumble/point_cloud.hpp"
#include "tumble/text_io.hpp"

namespace tumble {

namespace detail {

struct PlyProperty
{
  std::string name;
  bool is_list = false;
};

struct PlyElement
{
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

inline std::string ply_line_error(std::size_t line, const std::string& what)
{
  return "line " + std::to_string(line + 1) + ": " + what;
}

}  // namespace detail

/**
 * @brief Reads an ASCII PLY file.
 *
 * Only the `vertex` element is interpreted: x/y/z (any numeric type), the
 * optional red/green/blue colour triple and an optional `track_length`.
 * Other elements are skipped line by line. Vertices with non-finite
 * coordinates are dropped and counted in `stats`.
 */
inline PointCloud read_ply(std::string_view content, LoadStats* stats = nullptr)
{
  using detail::ply_line_error;
  const auto lines = text::split_lines(content);
  if (lines.empty() || text::trim(lines[0]) != "ply") {
    throw Error(ErrorKind::Parse, "missing 'ply' magic line");
  }

  std::vector<detail::PlyElement> elements;
  std::size_t i = 1;
  bool format_seen = false;
  bool header_done = false;
  for (; i < lines.size(); ++i) {
    const auto tokens = text::split_whitespace(lines[i]);
    if (tokens.empty() || tokens[0] == "comment" || tokens[0] == "obj_info") continue;
    if (tokens[0] == "end_header") {
      header_done = true;
      ++i;
      break;
    }
    if (tokens[0] == "format") {
      if (tokens.size() != 3) throw Error(ErrorKind::Parse, ply_line_error(i, "malformed format line"));
      if (tokens[1] != "ascii") {
        throw Error(ErrorKind::UnsupportedFormat, "PLY format '" + std::string(tokens[1]) +
                                                      "' is not supported (ASCII only)");
      }
      format_seen = true;
    } else if (tokens[0] == "element") {
      if (tokens.size() != 3) throw Error(ErrorKind::Parse, ply_line_error(i, "malformed element line"));
      const auto count = text::to_integer(tokens[2]);
      if (!count || *count < 0) throw Error(ErrorKind::Parse, ply_line_error(i, "bad element count"));
      elements.push_back({std::string(tokens[1]), static_cast<std::size_t>(*count), {}});
    } else if (tokens[0] == "property") {
      if (elements.empty()) throw Error(ErrorKind::Parse, ply_line_error(i, "property before element"));
      if (tokens.size() == 3) {
        elements.back().properties.push_back({std::string(tokens[2]), false});
      } else if (tokens.size() == 5 && tokens[1] == "list") {
        elements.back().properties.push_back({std::string(tokens[4]), true});
      } else {
        throw Error(ErrorKind::Parse, ply_line_error(i, "malformed property line"));
      }
    } else {
      throw Error(ErrorKind::Parse, ply_line_error(i, "unknown header keyword '" + std::string(tokens[0]) + "'"));
    }
  }
  if (!header_done) throw Error(ErrorKind::Parse, "missing end_header");
  if (!format_seen) throw Error(ErrorKind::Parse, "missing format line");

  const detail::PlyElement* vertex = nullptr;
  for (const auto& e : elements) {
    if (e.name == "vertex") vertex = &e;
  }
  if (vertex == nullptr) throw Error(ErrorKind::Schema, "PLY has no vertex element");

  constexpr int kNone = -1;
  int ix = kNone, iy = kNone, iz = kNone, ir = kNone, ig = kNone, ib = kNone, it = kNone;
  for (std::size_t p = 0; p < vertex->properties.size(); ++p) {
    const auto& prop = vertex->properties[p];
    if (prop.is_list) continue;
    const int idx = static_cast<int>(p);
    if (prop.name == "x") ix = idx;
    else if (prop.name == "y") iy = idx;
    else if (prop.name == "z") iz = idx;
    else if (prop.name == "red" || prop.name == "diffuse_red") ir = idx;
    else if (prop.name == "green" || prop.name == "diffuse_green") ig = idx;
    else if (prop.name == "blue" || prop.name == "diffuse_blue") ib = idx;
    else if (prop.name == "track_length") it = idx;
  }
  if (ix == kNone || iy == kNone || iz == kNone) {
    throw Error(ErrorKind::Schema, "vertex element needs x, y and z properties");
  }
  const bool with_color = ir != kNone && ig != kNone && ib != kNone;
  const bool with_track = it != kNone;

  PointCloud cloud;
  LoadStats local;
  for (const auto& element : elements) {
    for (std::size_t n = 0; n < element.count; ++n) {
      while (i < lines.size() && text::trim(lines[i]).empty()) ++i;
      if (i >= lines.size()) {
        throw Error(ErrorKind::Parse, "unexpected end of data in element '" + element.name + "'");
      }
      const auto tokens = text::split_whitespace(lines[i]);
      const std::size_t line_no = i++;
      if (&element != vertex) continue;

      std::vector<double> values(element.properties.size(), 0.0);
      std::size_t t = 0;
      for (std::size_t p = 0; p < element.properties.size(); ++p) {
        if (t >= tokens.size()) throw Error(ErrorKind::Parse, ply_line_error(line_no, "too few values"));
        if (element.properties[p].is_list) {
          const auto len = text::to_integer(tokens[t]);
          if (!len || *len < 0 || static_cast<std::size_t>(*len) > tokens.size() - t - 1) {
            throw Error(ErrorKind::Parse, ply_line_error(line_no, "bad list length"));
          }
          t += 1 + static_cast<std::size_t>(*len);
          continue;
        }
        const auto v = text::to_double(tokens[t++]);
        if (!v) throw Error(ErrorKind::Parse, ply_line_error(line_no, "bad number"));
        values[p] = *v;
      }
      if (t != tokens.size()) throw Error(ErrorKind::Parse, ply_line_error(line_no, "too many values"));

      const Vec3 point(values[ix], values[iy], values[iz]);
      if (!is_finite(point)) {
        ++local.dropped_nonfinite;
        continue;
      }
      cloud.points.push_back(point);
      if (with_color) {
        Color c{};
        const int channels[3] = {ir, ig, ib};
        for (int k = 0; k < 3; ++k) {
          const double v = values[channels[k]];
          if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v)) {
            throw Error(ErrorKind::Parse, ply_line_error(line_no, "colour must be an integer in [0, 255]"));
          }
          c[k] = static_cast<std::uint8_t>(v);
        }
        cloud.colors.push_back(c);
      }
      if (with_track) {
        const double v = values[it];
        if (!(v >= 0.0 && v <= 4294967295.0) || v != std::floor(v)) {
          throw Error(ErrorKind::Parse, ply_line_error(line_no, "track_length must be a non-negative integer"));
        }
        cloud.track_lengths.push_back(static_cast<std::uint32_t>(v));
      }
    }
  }
  if (stats) *stats = local;
  return cloud;
}

/// ASCII PLY with double coordinates printed to 9 significant digits.
inline std::string write_ply(const PointCloud& cloud)
{
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\n";
  if (cloud.has_colors()) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (cloud.has_track_lengths()) out += "property uint track_length\n";
  out += "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out += text::fmt9(p.x()) + ' ' + text::fmt9(p.y()) + ' ' + text::fmt9(p.z());
    if (cloud.has_colors()) {
      for (auto c : cloud.colors[i]) out += ' ' + std::to_string(c);
    }
    if (cloud.has_track_lengths()) out += ' ' + std::to_string(cloud.track_lengths[i]);
    out += '\n';
  }
  return out;
}

}  // namespace tumble

#endif  // TUMBLE_PLY_HPP
