#ifndef TUMBLE_FILTERS_HPP
#define TUMBLE_FILTERS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <unordered_map>
#include <vector>

#include "tumble/point_cloud.hpp"

namespace tumble {

using CellKey = std::array<std::int64_t, 3>;

struct CellKeyHash
{
  std::size_t operator()(const CellKey& k) const noexcept
  {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto v : k) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

inline CellKey cell_of(const Vec3& p, const Vec3& anchor, double cell)
{
  CellKey key;
  for (int k = 0; k < 3; ++k) {
    const double c = std::floor((p[k] - anchor[k]) / cell);
    require(std::abs(c) < 4.0e18, ErrorKind::InvalidArgument, "cell index overflow; cell size too small");
    key[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(c);
  }
  return key;
}

/// Uniform grid over point indices. Neighbour queries probe the 27 cells
/// around the query, so the search radius must not exceed the cell size.
class SpatialGrid
{
public:
  SpatialGrid(const std::vector<Vec3>& points, double cell) : points_(points), cell_(cell)
  {
    require(std::isfinite(cell) && cell > 0.0, ErrorKind::InvalidArgument, "grid cell must be positive");
    for (std::size_t i = 0; i < points.size(); ++i) cells_[cell_of(points[i], Vec3::Zero(), cell)].push_back(i);
  }

  /// Number of points other than `i` within `radius` (<= cell), stopping at `limit`.
  std::size_t count_neighbors(std::size_t i, double radius, std::size_t limit) const
  {
    const double r2 = radius * radius;
    const Vec3& p = points_[i];
    const CellKey c = cell_of(p, Vec3::Zero(), cell_);
    std::size_t count = 0;
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find({c[0] + dx, c[1] + dy, c[2] + dz});
          if (it == cells_.end()) continue;
          for (std::size_t j : it->second) {
            if (j == i) continue;
            if ((points_[j] - p).squaredNorm() <= r2 && ++count >= limit) return count;
          }
        }
      }
    }
    return count;
  }

  /// Distance to the nearest other point, searching outward ring by ring.
  double nearest_distance(std::size_t i) const
  {
    const Vec3& p = points_[i];
    const CellKey c = cell_of(p, Vec3::Zero(), cell_);
    double best2 = std::numeric_limits<double>::infinity();
    for (std::int64_t ring = 0;; ++ring) {
      for (std::int64_t dx = -ring; dx <= ring; ++dx) {
        for (std::int64_t dy = -ring; dy <= ring; ++dy) {
          for (std::int64_t dz = -ring; dz <= ring; ++dz) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
            const auto it = cells_.find({c[0] + dx, c[1] + dy, c[2] + dz});
            if (it == cells_.end()) continue;
            for (std::size_t j : it->second) {
              if (j != i) best2 = std::min(best2, (points_[j] - p).squaredNorm());
            }
          }
        }
      }
      // every point outside the searched block is at least ring * cell away
      const double reach = static_cast<double>(ring) * cell_;
      if (best2 <= reach * reach) return std::sqrt(best2);
    }
  }

private:
  const std::vector<Vec3>& points_;
  double cell_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells_;
};

/**
 * @brief Keeps the points that have at least `min_neighbors` other points
 * within distance `radius` (inclusive). Input order is preserved.
 */
inline PointCloud radius_outlier_removal(const PointCloud& cloud, double radius, std::size_t min_neighbors)
{
  require(std::isfinite(radius) && radius > 0.0, ErrorKind::InvalidArgument, "radius must be positive");
  require(min_neighbors >= 1, ErrorKind::InvalidArgument, "min_neighbors must be >= 1");
  if (cloud.empty()) return {};
  const SpatialGrid grid(cloud.points, radius);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (grid.count_neighbors(i, radius, min_neighbors) >= min_neighbors) keep.push_back(i);
  }
  return cloud.select(keep);
}

inline Vec3 min_corner(const std::vector<Vec3>& points)
{
  require(!points.empty(), ErrorKind::EmptyInput, "empty point set");
  Vec3 lo = points.front();
  for (const Vec3& p : points) lo = lo.cwiseMin(p);
  return lo;
}

/**
 * @brief Replaces the points of every occupied voxel by their mean.
 *
 * Voxels are axis-aligned cubes of edge `voxel_size` anchored at `anchor`.
 * Output is ordered by voxel index; members are accumulated in input order.
 * Colours are averaged (rounded); track lengths keep the member maximum.
 */
inline PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size, const Vec3& anchor)
{
  require(std::isfinite(voxel_size) && voxel_size > 0.0, ErrorKind::InvalidArgument, "voxel size must be positive");
  struct Accumulator
  {
    Vec3 sum = Vec3::Zero();
    std::array<std::uint64_t, 3> color{};
    std::uint32_t track = 0;
    std::size_t n = 0;
  };
  std::map<CellKey, Accumulator> voxels;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Accumulator& acc = voxels[cell_of(cloud.points[i], anchor, voxel_size)];
    acc.sum += cloud.points[i];
    if (cloud.has_colors()) {
      for (std::size_t k = 0; k < 3; ++k) acc.color[k] += cloud.colors[i][k];
    }
    if (cloud.has_track_lengths()) acc.track = std::max(acc.track, cloud.track_lengths[i]);
    ++acc.n;
  }
  PointCloud out;
  out.points.reserve(voxels.size());
  for (const auto& [key, acc] : voxels) {
    out.points.push_back(acc.sum / static_cast<double>(acc.n));
    if (cloud.has_colors()) {
      Color c{};
      for (std::size_t k = 0; k < 3; ++k) c[k] = static_cast<std::uint8_t>((acc.color[k] + acc.n / 2) / acc.n);
      out.colors.push_back(c);
    }
    if (cloud.has_track_lengths()) out.track_lengths.push_back(acc.track);
  }
  return out;
}

/// Anchors the voxel grid at the cloud's minimum corner.
inline PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size)
{
  if (cloud.empty()) return {};
  return voxel_downsample(cloud, voxel_size, min_corner(cloud.points));
}

/// Arithmetic mean of all points.
inline Vec3 centroid(const PointCloud& cloud)
{
  require(!cloud.empty(), ErrorKind::EmptyInput, "centroid of an empty cloud");
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : cloud.points) sum += p;
  return sum / static_cast<double>(cloud.size());
}

/// Median over points of the distance to the nearest other point.
inline double median_nearest_neighbor_distance(const std::vector<Vec3>& points)
{
  require(points.size() >= 2, ErrorKind::InvalidArgument, "need at least two points for spacing");
  Vec3 lo = points.front(), hi = points.front();
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double span = (hi - lo).maxCoeff();
  if (span == 0.0) return 0.0;
  // surface-like clouds: spacing ~ span / sqrt(n)
  const double cell = span / std::sqrt(static_cast<double>(points.size()));
  const SpatialGrid grid(points, cell);
  std::vector<double> d(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d[i] = grid.nearest_distance(i);
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  if (d.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(d.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace tumble

#endif  // TUMBLE_FILTERS_HPP
