#ifndef TUMBLE_TEST_ORACLES_HPP
#define TUMBLE_TEST_ORACLES_HPP

// Brute-force reference implementations and synthetic fixtures shared by the
// unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <tuple>
#include <vector>

#include "tumble/point_cloud.hpp"

namespace tumble::oracle {

/// O(n^2) neighbour count; returns the indices that survive.
inline std::vector<std::size_t> radius_filter(const std::vector<Vec3>& pts, double radius, std::size_t min_neighbors)
{
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j != i && (pts[i] - pts[j]).squaredNorm() <= radius * radius) ++n;
    }
    if (n >= min_neighbors) keep.push_back(i);
  }
  return keep;
}

/// Bucket oracle: floor((p - anchor) / size) keys in a std::map, means in key order.
inline std::vector<Vec3> voxel_means(const std::vector<Vec3>& pts, double size, const Vec3& anchor)
{
  std::map<std::tuple<long long, long long, long long>, std::pair<Vec3, std::size_t>> buckets;
  for (const Vec3& p : pts) {
    const auto key = std::make_tuple(static_cast<long long>(std::floor((p.x() - anchor.x()) / size)),
                                     static_cast<long long>(std::floor((p.y() - anchor.y()) / size)),
                                     static_cast<long long>(std::floor((p.z() - anchor.z()) / size)));
    auto& b = buckets.try_emplace(key, Vec3::Zero(), 0).first->second;
    b.first += p;
    ++b.second;
  }
  std::vector<Vec3> out;
  for (const auto& [key, b] : buckets) out.push_back(b.first / static_cast<double>(b.second));
  return out;
}

struct LabelledCloud
{
  PointCloud cloud;
  std::vector<int> face;  ///< 0..5 = axis * 2 + (positive side), -1 = outlier
};

/**
 * Axis-aligned cube centred at the origin with uniformly random face samples,
 * Gaussian noise `sigma` per axis and `outlier_fraction` of the final cloud
 * drawn uniformly from a box 1.5 edges wide. Faces listed in `skip` are left out.
 */
inline LabelledCloud noisy_cube(std::size_t per_face, double edge, double sigma, double outlier_fraction,
                                std::uint64_t seed, std::vector<int> skip = {})
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5 * edge, 0.5 * edge);
  std::uniform_real_distribution<double> wide(-0.75 * edge, 0.75 * edge);
  std::normal_distribution<double> g(0.0, sigma);
  LabelledCloud out;
  for (int f = 0; f < 6; ++f) {
    if (std::find(skip.begin(), skip.end(), f) != skip.end()) continue;
    const int axis = f / 2;
    const double side = (f % 2) ? 0.5 * edge : -0.5 * edge;
    for (std::size_t i = 0; i < per_face; ++i) {
      Vec3 p;
      p[axis] = side;
      p[(axis + 1) % 3] = u(rng);
      p[(axis + 2) % 3] = u(rng);
      if (sigma > 0.0) p += Vec3(g(rng), g(rng), g(rng));
      out.cloud.points.push_back(p);
      out.face.push_back(f);
    }
  }
  const auto surface = static_cast<double>(out.cloud.size());
  const auto outliers = static_cast<std::size_t>(std::lround(surface * outlier_fraction / (1.0 - outlier_fraction)));
  for (std::size_t i = 0; i < outliers; ++i) {
    out.cloud.points.emplace_back(wide(rng), wide(rng), wide(rng));
    out.face.push_back(-1);
  }
  return out;
}

inline Vec3 face_normal(int f)
{
  Vec3 n = Vec3::Zero();
  n[f / 2] = (f % 2) ? 1.0 : -1.0;
  return n;
}

}  // namespace tumble::oracle

#endif  // TUMBLE_TEST_ORACLES_HPP
