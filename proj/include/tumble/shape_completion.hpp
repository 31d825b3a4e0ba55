#ifndef TUMBLE_SHAPE_COMPLETION_HPP
#define TUMBLE_SHAPE_COMPLETION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "tumble/filters.hpp"
#include "tumble/plane.hpp"

namespace tumble {

enum class Primitive { Cube, Cylinder };

struct CompletionResult
{
  PointCloud cloud;               ///< input followed by synthesized points
  std::size_t synthesized = 0;
  double spacing = 0.0;           ///< grid spacing used for synthesized points
};

namespace detail {

/// Tiles are this many median-spacings wide; an observed face tile is then
/// expected to hold about eight points, so empty tiles mean missing surface.
inline constexpr double kTileSpacings = 6.0;

/// Rectangular surface patch parameterized by (u, v) in [0, extent_u] x [0, extent_v].
struct Patch
{
  Vec3 origin;
  Vec3 du;  ///< unit
  Vec3 dv;  ///< unit
  double extent_u;
  double extent_v;
};

/// Coverage grid over one face: marks tiles that contain observed points.
struct TileGrid
{
  std::size_t nu = 1, nv = 1;
  std::vector<bool> covered;
  std::size_t hits = 0;

  TileGrid(double extent_u, double extent_v, double tile)
    : nu(std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(extent_u / tile)))),
      nv(std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(extent_v / tile)))),
      covered(nu * nv, false)
  {}

  void mark(double fu, double fv)  // fractions in [0, 1]
  {
    const auto iu = std::min(nu - 1, static_cast<std::size_t>(std::clamp(fu, 0.0, 1.0) * static_cast<double>(nu)));
    const auto iv = std::min(nv - 1, static_cast<std::size_t>(std::clamp(fv, 0.0, 1.0) * static_cast<double>(nv)));
    covered[iu * nv + iv] = true;
    ++hits;
  }

  bool is_covered(double fu, double fv) const
  {
    const auto iu = std::min(nu - 1, static_cast<std::size_t>(std::clamp(fu, 0.0, 1.0) * static_cast<double>(nu)));
    const auto iv = std::min(nv - 1, static_cast<std::size_t>(std::clamp(fv, 0.0, 1.0) * static_cast<double>(nv)));
    return covered[iu * nv + iv];
  }

  double covered_fraction() const
  {
    return static_cast<double>(std::count(covered.begin(), covered.end(), true)) / static_cast<double>(covered.size());
  }
};

inline void append_synthetic(CompletionResult& result, const Vec3& p, bool with_color, bool with_track)
{
  result.cloud.points.push_back(p);
  if (with_color) result.cloud.colors.push_back(Color{128, 128, 128});
  if (with_track) result.cloud.track_lengths.push_back(0);
  ++result.synthesized;
}

/// Fills the uncovered tiles of every patch with a regular grid at `spacing`.
inline void fill_patches(CompletionResult& result, const std::vector<Patch>& patches,
                         const std::vector<TileGrid>& grids, double spacing, bool with_color, bool with_track)
{
  for (std::size_t f = 0; f < patches.size(); ++f) {
    const Patch& patch = patches[f];
    const auto nu = std::max<long>(1, std::lround(patch.extent_u / spacing));
    const auto nv = std::max<long>(1, std::lround(patch.extent_v / spacing));
    for (long i = 0; i < nu; ++i) {
      for (long j = 0; j < nv; ++j) {
        const double fu = (static_cast<double>(i) + 0.5) / static_cast<double>(nu);
        const double fv = (static_cast<double>(j) + 0.5) / static_cast<double>(nv);
        if (grids[f].is_covered(fu, fv)) continue;
        append_synthetic(result, patch.origin + fu * patch.extent_u * patch.du + fv * patch.extent_v * patch.dv,
                         with_color, with_track);
      }
    }
  }
}

inline CompletionResult complete_box(const PointCloud& cloud, const std::vector<Plane>& planes)
{
  require(planes.size() >= 3, ErrorKind::InvalidArgument,
          "cube completion needs at least 3 detected planes to bound the box");
  require(cloud.size() >= 2, ErrorKind::InvalidArgument, "cube completion needs observed points");
  // Box axes from the two largest non-parallel planes.
  std::vector<std::size_t> order(planes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return planes[a].inlier_indices.size() > planes[b].inlier_indices.size();
  });
  const TargetFrame basis = [&] {
    std::vector<Plane> sorted;
    for (std::size_t i : order) sorted.push_back(planes[i]);
    return define_target_frame(sorted, Vec3::Zero());
  }();
  const Mat3 axes = basis.axes.matrix();

  // Extents from the inliers of all planes.
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  std::size_t used = 0;
  for (const Plane& plane : planes) {
    for (std::size_t i : plane.inlier_indices) {
      require(i < cloud.size(), ErrorKind::InvalidArgument, "plane inlier index outside the cloud");
      const Vec3 u = axes.transpose() * cloud.points[i];
      lo = lo.cwiseMin(u);
      hi = hi.cwiseMax(u);
      ++used;
    }
  }
  require(used >= 3 && (hi - lo).minCoeff() > 0.0, ErrorKind::Degenerate, "planes do not span a box");

  const double spacing_nn = median_nearest_neighbor_distance(cloud.points);
  require(spacing_nn > 0.0, ErrorKind::Degenerate, "observed points have zero spacing");
  const double tile = kTileSpacings * spacing_nn;
  const double slab = 3.0 * spacing_nn;

  // Faces: (axis k, low/high side). Patch spans the other two axes.
  std::vector<Patch> patches;
  std::vector<TileGrid> grids;
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3, b = (k + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      Vec3 corner_local;
      corner_local[k] = side == 0 ? lo[k] : hi[k];
      corner_local[a] = lo[a];
      corner_local[b] = lo[b];
      patches.push_back({axes * corner_local, axes.col(a), axes.col(b), hi[a] - lo[a], hi[b] - lo[b]});
      grids.emplace_back(hi[a] - lo[a], hi[b] - lo[b], tile);
    }
  }

  // Each observed point marks the tile of the nearest face within the slab.
  for (const Vec3& p : cloud.points) {
    const Vec3 u = axes.transpose() * p;
    int best = -1;
    double best_d = slab;
    for (int k = 0; k < 3; ++k) {
      const int a = (k + 1) % 3, b = (k + 2) % 3;
      if (u[a] < lo[a] - slab || u[a] > hi[a] + slab || u[b] < lo[b] - slab || u[b] > hi[b] + slab) continue;
      for (int side = 0; side < 2; ++side) {
        const double d = std::abs(u[k] - (side == 0 ? lo[k] : hi[k]));
        if (d <= best_d) {
          best_d = d;
          best = 2 * k + side;
        }
      }
    }
    if (best < 0) continue;
    const int k = best / 2, a = (k + 1) % 3, b = (k + 2) % 3;
    grids[static_cast<std::size_t>(best)].mark((u[a] - lo[a]) / (hi[a] - lo[a]), (u[b] - lo[b]) / (hi[b] - lo[b]));
  }

  // Observed areal density over the covered tiles.
  double covered_area = 0.0;
  std::size_t covered_points = 0;
  for (std::size_t f = 0; f < patches.size(); ++f) {
    const double tile_area = patches[f].extent_u * patches[f].extent_v / static_cast<double>(grids[f].covered.size());
    covered_area += tile_area * static_cast<double>(std::count(grids[f].covered.begin(), grids[f].covered.end(), true));
    covered_points += grids[f].hits;
  }
  require(covered_points > 0 && covered_area > 0.0, ErrorKind::Degenerate, "no observed surface points near the box");
  const double spacing = 1.0 / std::sqrt(static_cast<double>(covered_points) / covered_area);

  CompletionResult result;
  result.cloud = cloud;
  result.spacing = spacing;
  fill_patches(result, patches, grids, spacing, cloud.has_colors(), cloud.has_track_lengths());
  return result;
}

inline CompletionResult complete_cylinder(const PointCloud& cloud, const std::vector<Plane>& planes)
{
  require(!planes.empty(), ErrorKind::InvalidArgument,
          "cylinder completion needs a detected end-cap plane to fix the axis");
  require(cloud.size() >= 3, ErrorKind::InvalidArgument, "cylinder completion needs observed points");
  const Vec3 axis = planes.front().normal.normalized();
  const Vec3 e1 = (std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY()).cross(axis).normalized();
  const Vec3 e2 = axis.cross(e1);

  const double spacing_nn = median_nearest_neighbor_distance(cloud.points);
  require(spacing_nn > 0.0, ErrorKind::Degenerate, "observed points have zero spacing");
  const double slab = 3.0 * spacing_nn;

  double hmin = std::numeric_limits<double>::infinity(), hmax = -hmin;
  for (const Vec3& p : cloud.points) {
    hmin = std::min(hmin, p.dot(axis));
    hmax = std::max(hmax, p.dot(axis));
  }
  // Circle fit (algebraic, Kasa) on points away from the caps.
  std::vector<Eigen::Vector3d> rows;
  for (const Vec3& p : cloud.points) {
    const double h = p.dot(axis);
    if (h - hmin <= slab || hmax - h <= slab) continue;
    const double x = p.dot(e1), y = p.dot(e2);
    rows.emplace_back(x, y, 1.0);
  }
  require(rows.size() >= 3, ErrorKind::Degenerate, "too few lateral points for a cylinder fit");
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    M.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    rhs[static_cast<Eigen::Index>(i)] = rows[i].x() * rows[i].x() + rows[i].y() * rows[i].y();
  }
  const Eigen::Vector3d sol = M.colPivHouseholderQr().solve(rhs);
  const double cx = 0.5 * sol[0], cy = 0.5 * sol[1];
  const double radius = std::sqrt(std::max(0.0, sol[2] + cx * cx + cy * cy));
  require(std::isfinite(radius) && radius > 0.0, ErrorKind::Degenerate, "cylinder radius fit failed");

  const double height = hmax - hmin;
  const double circumference = 2.0 * kPi * radius;
  const double tile = kTileSpacings * spacing_nn;
  TileGrid lateral(circumference, height, tile);
  TileGrid cap_lo(2.0 * radius, 2.0 * radius, tile), cap_hi(2.0 * radius, 2.0 * radius, tile);
  for (const Vec3& p : cloud.points) {
    const double h = p.dot(axis);
    const double x = p.dot(e1) - cx, y = p.dot(e2) - cy;
    const double r = std::hypot(x, y);
    const double d_side = std::abs(r - radius);
    const double d_lo = std::abs(h - hmin), d_hi = std::abs(h - hmax);
    if (r <= radius + slab && std::min(d_lo, d_hi) < d_side && std::min(d_lo, d_hi) <= slab) {
      (d_lo <= d_hi ? cap_lo : cap_hi).mark((x + radius) / (2.0 * radius), (y + radius) / (2.0 * radius));
    } else if (d_side <= slab) {
      const double angle = std::atan2(y, x) + kPi;  // [0, 2 pi]
      lateral.mark(angle / (2.0 * kPi), (h - hmin) / height);
    }
  }

  const double lateral_tile_area = circumference * height / static_cast<double>(lateral.covered.size());
  const double covered_area =
      lateral_tile_area * static_cast<double>(std::count(lateral.covered.begin(), lateral.covered.end(), true));
  require(lateral.hits > 0 && covered_area > 0.0, ErrorKind::Degenerate, "no observed lateral surface");
  const double spacing = 1.0 / std::sqrt(static_cast<double>(lateral.hits) / covered_area);

  CompletionResult result;
  result.cloud = cloud;
  result.spacing = spacing;
  const Vec3 center_lo = (cx * e1 + cy * e2) + hmin * axis;
  const bool with_color = cloud.has_colors(), with_track = cloud.has_track_lengths();
  const auto n_around = std::max<long>(3, std::lround(circumference / spacing));
  const auto n_along = std::max<long>(1, std::lround(height / spacing));
  for (long i = 0; i < n_around; ++i) {
    for (long j = 0; j < n_along; ++j) {
      const double fu = (static_cast<double>(i) + 0.5) / static_cast<double>(n_around);
      const double fv = (static_cast<double>(j) + 0.5) / static_cast<double>(n_along);
      if (lateral.is_covered(fu, fv)) continue;
      const double angle = fu * 2.0 * kPi - kPi;
      append_synthetic(result, center_lo + radius * (std::cos(angle) * e1 + std::sin(angle) * e2) + fv * height * axis,
                       with_color, with_track);
    }
  }
  const auto n_cap = std::max<long>(1, std::lround(2.0 * radius / spacing));
  for (const auto* cap : {&cap_lo, &cap_hi}) {
    const double h = cap == &cap_lo ? 0.0 : height;
    for (long i = 0; i < n_cap; ++i) {
      for (long j = 0; j < n_cap; ++j) {
        const double fu = (static_cast<double>(i) + 0.5) / static_cast<double>(n_cap);
        const double fv = (static_cast<double>(j) + 0.5) / static_cast<double>(n_cap);
        const double x = (2.0 * fu - 1.0) * radius, y = (2.0 * fv - 1.0) * radius;
        if (std::hypot(x, y) > radius || cap->is_covered(fu, fv)) continue;
        append_synthetic(result, center_lo + x * e1 + y * e2 + h * axis, with_color, with_track);
      }
    }
  }
  return result;
}

}  // namespace detail

/**
 * @brief Fills in surface missing from a damaged primitive-shaped target.
 *
 * The primitive is fitted to the detected planes (box: axes from plane
 * normals, extents from inlier spans; cylinder: axis from the first plane,
 * radius by least squares). Each face is tiled; tiles without observed
 * points receive a regular grid of points at the observed areal density.
 */
inline CompletionResult complete_shape(const PointCloud& cloud, Primitive primitive, const std::vector<Plane>& planes)
{
  return primitive == Primitive::Cube ? detail::complete_box(cloud, planes) : detail::complete_cylinder(cloud, planes);
}

}  // namespace tumble

#endif  // TUMBLE_SHAPE_COMPLETION_HPP
