#pragma once

// Deterministic point-set kernels: sampling, neighbor queries, inverse
// distance interpolation, set distances and the kurtosis perturbation metric.
// Neighbor search is brute force; clouds here hold a few thousand points.

#include "pcadv/common.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pcadv::geometry {

/// Below this distance a query snaps to the coincident source point.
inline constexpr double kSnapDistance = 1e-8;

/// Ragged per-query neighbor lists, nearest first.
///
/// Distances are non-decreasing within a list; ties are ordered by source
/// index.
struct NeighborIndex {
  std::vector<std::size_t> offsets{0};
  std::vector<int> indices;
  std::vector<double> distances;

  std::size_t queries() const { return offsets.size() - 1; }
  std::span<const int> neighbors(std::size_t q) const {
    return {indices.data() + offsets[q], offsets[q + 1] - offsets[q]};
  }
  std::span<const double> neighbor_distances(std::size_t q) const {
    return {distances.data() + offsets[q], offsets[q + 1] - offsets[q]};
  }

  /// Rectangular queries x width layout. Short lists are padded by repeating
  /// their first entry; long lists are truncated.
  std::vector<int> padded(std::size_t width) const;
};

/// Per-query source indices and normalized weights for 3-NN interpolation.
struct InterpolationWeights {
  static constexpr std::size_t kNeighbors = 3;
  std::vector<int> indices;     // queries x 3
  std::vector<double> weights;  // queries x 3, each row sums to 1
  std::size_t queries() const { return indices.size() / kNeighbors; }
};

/// Centers the bounding box at the origin and scales its longest edge to 1.
/// Zero-extent clouds are only translated.
template <typename T>
Points<T> normalize_unit_cube(const Points<T>& cloud);

/// Index of the point closest to the centroid (lowest index on ties). Used
/// as a permutation-invariant seed for farthest point sampling.
template <typename T>
std::size_t canonical_seed(const Points<T>& cloud);

/// Greedy maximin sampling of `m` distinct indices starting at `seed_index`.
template <typename T>
std::vector<int> farthest_point_sample(const Points<T>& cloud, std::size_t m,
                                       std::size_t seed_index);

template <typename T>
NeighborIndex knn(const Points<T>& query, const Points<T>& source,
                  std::size_t k);

/// Up to `max_k` nearest source points within `radius` of each query. An
/// empty ball falls back to the single nearest source point.
template <typename T>
NeighborIndex ball_query(const Points<T>& query, const Points<T>& source,
                         double radius, std::size_t max_k);

template <typename T>
InterpolationWeights interpolation_weights(const Points<T>& query,
                                           const Points<T>& source);

/// Inverse-distance weighted average over the three nearest source points.
template <typename T>
Matrix<T> interpolate_features(const Points<T>& query, const Points<T>& source,
                               const Matrix<T>& source_features);

/// Mean Euclidean displacement between corresponding points.
template <typename T>
double paired_l2_distance(const Points<T>& a, const Points<T>& b);

/// Half the sum of the two mean nearest-neighbor distances (not squared).
template <typename T>
double chamfer_distance(const Points<T>& a, const Points<T>& b);

template <typename T>
double hausdorff_distance(const Points<T>& a, const Points<T>& b);

/// Distance from every point to its nearest other point, sorted ascending.
template <typename T>
std::vector<double> nearest_neighbor_distances(const Points<T>& cloud);

/// Pearson (non-excess) kurtosis m4 / m2^2. Throws UndefinedMetric on zero
/// variance.
double kurtosis(std::span<const double> values);

template <typename T>
double kurtosis_metric(const Points<T>& cloud);

}  // namespace pcadv::geometry
