#ifndef TUMBLE_POINT_CLOUD_HPP
#define TUMBLE_POINT_CLOUD_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "tumble/geom.hpp"

namespace tumble {

using Color = std::array<std::uint8_t, 3>;

/// Sparse reconstruction. `colors` and `track_lengths` are either empty or
/// parallel to `points`.
struct PointCloud
{
  std::vector<Vec3> points;
  std::vector<Color> colors;
  std::vector<std::uint32_t> track_lengths;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_track_lengths() const { return !track_lengths.empty(); }

  /// Copies the subset `indices` (in the given order) with its attributes.
  PointCloud select(const std::vector<std::size_t>& indices) const
  {
    PointCloud out;
    out.points.reserve(indices.size());
    for (std::size_t i : indices) {
      out.points.push_back(points[i]);
      if (has_colors()) out.colors.push_back(colors[i]);
      if (has_track_lengths()) out.track_lengths.push_back(track_lengths[i]);
    }
    return out;
  }
};

/// Counts from loaders that drop invalid records instead of failing.
struct LoadStats
{
  std::size_t dropped_nonfinite = 0;
};

}  // namespace tumble

#endif  // TUMBLE_POINT_CLOUD_HPP
