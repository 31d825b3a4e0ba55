#ifndef TUMBLE_PLANE_HPP
#define TUMBLE_PLANE_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "tumble/point_cloud.hpp"

namespace tumble {

/// Plane n . p + d = 0 with unit normal, sign chosen so that d <= 0.
struct Plane
{
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  std::vector<std::size_t> inlier_indices;

  double signed_distance(const Vec3& p) const { return normal.dot(p) + offset; }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent random stream per (seed, iteration) so that the result does
/// not depend on evaluation order.
class IterationStream
{
public:
  IterationStream(std::uint64_t seed, std::uint64_t iteration)
    : state_(splitmix64(seed ^ splitmix64(iteration + 0x632be59bd9b4e019ULL)))
  {}

  std::size_t below(std::size_t n)
  {
    state_ = splitmix64(state_);
    return static_cast<std::size_t>(state_ % n);
  }

private:
  std::uint64_t state_;
};

inline void canonicalize(Plane& plane)
{
  if (plane.offset > 0.0) {
    plane.normal = -plane.normal;
    plane.offset = -plane.offset;
  }
}

/// Least-squares plane through `indices`: smallest eigenvector of the covariance.
inline Plane fit_plane_pca(const std::vector<Vec3>& points, const std::vector<std::size_t>& indices)
{
  Vec3 mean = Vec3::Zero();
  for (std::size_t i : indices) mean += points[i];
  mean /= static_cast<double>(indices.size());
  Mat3 cov = Mat3::Zero();
  for (std::size_t i : indices) {
    const Vec3 d = points[i] - mean;
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  Plane plane;
  plane.normal = eig.eigenvectors().col(0).normalized();
  plane.offset = -plane.normal.dot(mean);
  canonicalize(plane);
  return plane;
}

inline std::vector<std::size_t> collect_inliers(const std::vector<Vec3>& points, const std::vector<std::size_t>& subset,
                                                const Plane& plane, double threshold)
{
  std::vector<std::size_t> inliers;
  for (std::size_t i : subset) {
    if (std::abs(plane.signed_distance(points[i])) <= threshold) inliers.push_back(i);
  }
  return inliers;
}

/// RANSAC over the points listed in `subset`; inlier indices refer to `points`.
inline Plane ransac_plane_subset(const std::vector<Vec3>& points, const std::vector<std::size_t>& subset,
                                 double threshold, std::size_t max_iterations, std::uint64_t seed)
{
  require(std::isfinite(threshold) && threshold > 0.0, ErrorKind::InvalidArgument, "RANSAC threshold must be positive");
  if (subset.size() < 3) throw Error(ErrorKind::NoPlane, "need at least 3 points for a plane");

  std::size_t best_count = 0;
  Plane best;
  bool found = false;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    IterationStream rng(seed, it);
    const std::size_t a = rng.below(subset.size());
    std::size_t b = rng.below(subset.size() - 1);
    if (b >= a) ++b;
    std::size_t c = rng.below(subset.size() - 2);
    for (std::size_t taken : {std::min(a, b), std::max(a, b)}) {
      if (c >= taken) ++c;
    }
    const Vec3& pa = points[subset[a]];
    const Vec3 ab = points[subset[b]] - pa;
    const Vec3 ac = points[subset[c]] - pa;
    const Vec3 n = ab.cross(ac);
    const double scale = ab.norm() * ac.norm();
    if (!(n.norm() > 1e-9 * scale) || scale == 0.0) continue;  // collinear sample
    Plane candidate;
    candidate.normal = n.normalized();
    candidate.offset = -candidate.normal.dot(pa);
    std::size_t count = 0;
    for (std::size_t i : subset) {
      if (std::abs(candidate.signed_distance(points[i])) <= threshold) ++count;
    }
    if (!found || count > best_count) {
      best = candidate;
      best_count = count;
      found = true;
    }
  }
  if (!found) throw Error(ErrorKind::NoPlane, "every RANSAC sample was degenerate (collinear points)");

  best.inlier_indices = collect_inliers(points, subset, best, threshold);
  // Consensus refit: PCA on the inliers, re-collect, repeat while it helps.
  for (int round = 0; round < 3; ++round) {
    Plane refit = fit_plane_pca(points, best.inlier_indices);
    refit.inlier_indices = collect_inliers(points, subset, refit, threshold);
    if (refit.inlier_indices.size() < 3 || refit.inlier_indices.size() < best.inlier_indices.size()) break;
    const bool same = refit.inlier_indices == best.inlier_indices;
    best = std::move(refit);
    if (same) break;
  }
  canonicalize(best);
  return best;
}

}  // namespace detail

/**
 * @brief Best plane by inlier count over `max_iterations` random 3-point
 * samples, refit to its inliers by least squares.
 *
 * Each iteration draws from its own seeded stream, so the result is
 * bit-reproducible for a given seed. Throws NoPlane when every sample is
 * degenerate.
 */
inline Plane ransac_plane(const PointCloud& cloud, double threshold, std::size_t max_iterations, std::uint64_t seed)
{
  std::vector<std::size_t> all(cloud.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return detail::ransac_plane_subset(cloud.points, all, threshold, max_iterations, seed);
}

/**
 * @brief Sequential RANSAC: detect a plane, remove its inliers, repeat.
 *
 * Stops after `max_planes` or when the best plane holds less than
 * `min_inlier_fraction` of the remaining points. A final pass hands every
 * inlier to the detected plane it is closest to (points near a shared edge
 * are otherwise claimed by whichever plane was found first) and refits.
 * The returned inliers of a plane are all cloud points within `threshold`
 * of it, so inlier sets of adjacent planes may share edge points.
 */
inline std::vector<Plane> detect_planes(const PointCloud& cloud, std::size_t max_planes, double threshold,
                                        double min_inlier_fraction, std::uint64_t seed,
                                        std::size_t max_iterations = 1000)
{
  require(min_inlier_fraction >= 0.0 && min_inlier_fraction <= 1.0, ErrorKind::InvalidArgument,
          "min_inlier_fraction must be in [0, 1]");
  std::vector<Plane> planes;
  std::vector<std::size_t> remaining(cloud.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  for (std::size_t k = 0; k < max_planes && remaining.size() >= 3; ++k) {
    Plane plane;
    try {
      plane = detail::ransac_plane_subset(cloud.points, remaining, threshold, max_iterations,
                                          detail::splitmix64(seed + k));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NoPlane) break;
      throw;
    }
    const double fraction = static_cast<double>(plane.inlier_indices.size()) / static_cast<double>(remaining.size());
    if (fraction < min_inlier_fraction) break;
    std::vector<std::size_t> rest;
    std::set_difference(remaining.begin(), remaining.end(), plane.inlier_indices.begin(),
                        plane.inlier_indices.end(), std::back_inserter(rest));
    remaining = std::move(rest);
    planes.push_back(std::move(plane));
  }

  if (planes.size() > 1) {
    std::vector<std::vector<std::size_t>> owned(planes.size());
    for (std::size_t p = 0; p < planes.size(); ++p) {
      for (std::size_t i : planes[p].inlier_indices) {
        std::size_t best = p;
        double best_r = std::abs(planes[p].signed_distance(cloud.points[i]));
        for (std::size_t q = 0; q < planes.size(); ++q) {
          const double r = std::abs(planes[q].signed_distance(cloud.points[i]));
          if (r < best_r) {
            best = q;
            best_r = r;
          }
        }
        owned[best].push_back(i);
      }
    }
    std::vector<Plane> refined;
    for (std::size_t p = 0; p < planes.size(); ++p) {
      if (owned[p].size() < 3) continue;
      refined.push_back(detail::fit_plane_pca(cloud.points, owned[p]));
    }
    // Refitted planes sit closer to the true surfaces than the RANSAC
    // hypotheses, so collect inliers again from the whole cloud.
    std::vector<std::vector<std::size_t>> members(refined.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      std::size_t best = refined.size();
      double best_r = threshold;
      for (std::size_t q = 0; q < refined.size(); ++q) {
        const double r = std::abs(refined[q].signed_distance(cloud.points[i]));
        if (r <= best_r) {
          best = q;
          best_r = r;
        }
      }
      if (best < refined.size()) members[best].push_back(i);
    }
    // Fits use the nearest-plane partition; inliers are every point within the
    // threshold, so points along a shared edge count for both faces.
    std::vector<std::size_t> all(cloud.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    planes.clear();
    for (std::size_t p = 0; p < refined.size(); ++p) {
      if (members[p].size() < 3) continue;
      Plane refit = detail::fit_plane_pca(cloud.points, members[p]);
      refit.inlier_indices = detail::collect_inliers(cloud.points, all, refit, threshold);
      planes.push_back(std::move(refit));
    }
  }
  return planes;
}

inline nlohmann::json plane_to_json(const Plane& plane)
{
  return {{"normal", {plane.normal.x(), plane.normal.y(), plane.normal.z()}},
          {"d", plane.offset},
          {"inlier_count", plane.inlier_indices.size()}};
}

/// Body-fixed frame: origin plus axes whose columns are x_T, y_T, z_T in world coordinates.
struct TargetFrame
{
  Vec3 origin = Vec3::Zero();
  Rotation axes;

  /// World-frame vector re-expressed along the target axes.
  Vec3 to_target(const Vec3& world_vector) const { return axes.inverse() * world_vector; }
};

/**
 * @brief Builds the body frame from detected planes.
 *
 * x_T is the normal of the plane with the most inliers; z_T is the next
 * plane normal (by inlier count) at least 10 degrees away from x_T, with
 * its x_T component removed; y_T = z_T x x_T.
 */
inline TargetFrame define_target_frame(const std::vector<Plane>& planes, const Vec3& origin)
{
  constexpr double kMinSeparation = 10.0 * kDegToRad;
  require(planes.size() >= 2, ErrorKind::Degenerate, "target frame needs at least two planes");
  require(is_finite(origin), ErrorKind::InvalidArgument, "frame origin must be finite");
  std::vector<std::size_t> order(planes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return planes[a].inlier_indices.size() > planes[b].inlier_indices.size();
  });
  const Vec3 x = planes[order[0]].normal.normalized();
  for (std::size_t k = 1; k < order.size(); ++k) {
    const Vec3& n = planes[order[k]].normal;
    if (line_angle(x, n) < kMinSeparation) continue;
    const Vec3 z = (n - n.dot(x) * x).normalized();
    const Vec3 y = z.cross(x);
    Mat3 axes;
    axes.col(0) = x;
    axes.col(1) = y;
    axes.col(2) = z;
    return TargetFrame{origin, Rotation::from_matrix(axes)};
  }
  throw Error(ErrorKind::Degenerate, "plane normals are within 10 degrees of each other; cannot define a frame");
}

inline nlohmann::json frame_to_json(const TargetFrame& frame)
{
  const Mat3 m = frame.axes.matrix();
  nlohmann::json axes = nlohmann::json::object();
  const char* names[] = {"x", "y", "z"};
  for (int k = 0; k < 3; ++k) axes[names[k]] = {m(0, k), m(1, k), m(2, k)};
  const auto& q = frame.axes.quaternion();
  return {{"origin", {frame.origin.x(), frame.origin.y(), frame.origin.z()}},
          {"axes", axes},
          {"quaternion_wxyz", {q.w(), q.x(), q.y(), q.z()}}};
}

inline TargetFrame frame_from_json(const nlohmann::json& j)
{
  try {
    const auto& o = j.at("origin");
    const auto& q = j.at("quaternion_wxyz");
    TargetFrame f;
    f.origin = Vec3(o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>());
    f.axes = Rotation::from_quaternion(q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
                                       q.at(3).get<double>());
    require(is_finite(f.origin), ErrorKind::Schema, "frame origin must be finite");
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("bad target frame JSON: ") + e.what());
  }
}

}  // namespace tumble

#endif  // TUMBLE_PLANE_HPP
