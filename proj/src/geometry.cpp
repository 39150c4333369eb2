#include "pcadv/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

namespace pcadv::geometry {
namespace {

template <typename T>
double squared_distance(const Points<T>& a, Eigen::Index i, const Points<T>& b,
                        Eigen::Index j) {
  const double dx = double(a(i, 0)) - double(b(j, 0));
  const double dy = double(a(i, 1)) - double(b(j, 1));
  const double dz = double(a(i, 2)) - double(b(j, 2));
  return dx * dx + dy * dy + dz * dz;
}

template <typename T>
void require_xyz(const Points<T>& cloud, const char* what) {
  if (cloud.cols() != 3) {
    throw InvalidArgument(std::string(what) + ": expected N x 3 coordinates");
  }
}

template <typename T>
void require_nonempty(const Points<T>& cloud, const char* what) {
  require_xyz(cloud, what);
  if (cloud.rows() == 0) {
    throw InvalidArgument(std::string(what) + ": empty point cloud");
  }
}

// Squared distance from every query to its nearest source point.
template <typename T>
std::vector<double> nearest_squared(const Points<T>& query,
                                    const Points<T>& source) {
  std::vector<double> best(query.rows(), std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    for (Eigen::Index j = 0; j < source.rows(); ++j) {
      best[i] = std::min(best[i], squared_distance(query, i, source, j));
    }
  }
  return best;
}

}  // namespace

std::vector<int> NeighborIndex::padded(std::size_t width) const {
  std::vector<int> out;
  out.reserve(queries() * width);
  for (std::size_t q = 0; q < queries(); ++q) {
    auto list = neighbors(q);
    for (std::size_t j = 0; j < width; ++j) {
      out.push_back(j < list.size() ? list[j] : list.front());
    }
  }
  return out;
}

template <typename T>
Points<T> normalize_unit_cube(const Points<T>& cloud) {
  require_nonempty(cloud, "normalize_unit_cube");
  if (!cloud.allFinite()) {
    throw InvalidArgument("normalize_unit_cube: non-finite coordinates");
  }
  const Eigen::Matrix<double, 1, 3> lo = cloud.template cast<double>().colwise().minCoeff();
  const Eigen::Matrix<double, 1, 3> hi = cloud.template cast<double>().colwise().maxCoeff();
  const Eigen::Matrix<double, 1, 3> mid = 0.5 * (lo + hi);
  const double extent = (hi - lo).maxCoeff();
  const double scale = extent > 0.0 ? 1.0 / extent : 1.0;
  // Already normalized to working precision: return as is so that
  // re-normalizing stored data is exactly idempotent.
  const double tol = 4.0 * double(std::numeric_limits<T>::epsilon());
  if (mid.cwiseAbs().maxCoeff() <= tol &&
      (std::abs(extent - 1.0) <= tol || extent == 0.0)) {
    return cloud;
  }
  Points<T> out(cloud.rows(), 3);
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    for (int c = 0; c < 3; ++c) {
      out(i, c) = T((double(cloud(i, c)) - mid(c)) * scale);
    }
  }
  return out;
}

template <typename T>
std::size_t canonical_seed(const Points<T>& cloud) {
  require_nonempty(cloud, "canonical_seed");
  const Eigen::Matrix<double, 1, 3> centroid =
      cloud.template cast<double>().colwise().mean();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    const double d =
        (cloud.row(i).template cast<double>() - centroid).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = std::size_t(i);
    }
  }
  return best;
}

template <typename T>
std::vector<int> farthest_point_sample(const Points<T>& cloud, std::size_t m,
                                       std::size_t seed_index) {
  require_xyz(cloud, "farthest_point_sample");
  const auto n = std::size_t(cloud.rows());
  if (m < 1 || m > n) {
    throw InvalidArgument("farthest_point_sample: need 1 <= m <= N, got m=" +
                          std::to_string(m) + ", N=" + std::to_string(n));
  }
  if (seed_index >= n) {
    throw InvalidArgument("farthest_point_sample: seed index out of range");
  }
  std::vector<int> picked;
  picked.reserve(m);
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  std::vector<bool> taken(n, false);
  std::size_t current = seed_index;
  for (std::size_t step = 0; step < m; ++step) {
    picked.push_back(int(current));
    taken[current] = true;
    std::size_t next = n;
    double next_d = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      min_d[j] = std::min(min_d[j], squared_distance(cloud, Eigen::Index(current),
                                                     cloud, Eigen::Index(j)));
      if (min_d[j] > next_d) {
        next_d = min_d[j];
        next = j;
      }
    }
    current = next;
  }
  return picked;
}

template <typename T>
NeighborIndex knn(const Points<T>& query, const Points<T>& source,
                  std::size_t k) {
  require_xyz(query, "knn");
  require_xyz(source, "knn");
  if (k > std::size_t(source.rows())) {
    throw InvalidArgument("knn: k=" + std::to_string(k) +
                          " exceeds source size " +
                          std::to_string(source.rows()));
  }
  NeighborIndex out;
  out.offsets.reserve(query.rows() + 1);
  out.indices.reserve(query.rows() * k);
  out.distances.reserve(query.rows() * k);
  std::vector<std::pair<double, int>> cand(source.rows());
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    for (Eigen::Index j = 0; j < source.rows(); ++j) {
      cand[j] = {squared_distance(query, i, source, j), int(j)};
    }
    std::partial_sort(cand.begin(), cand.begin() + std::ptrdiff_t(k), cand.end());
    for (std::size_t j = 0; j < k; ++j) {
      out.indices.push_back(cand[j].second);
      out.distances.push_back(std::sqrt(cand[j].first));
    }
    out.offsets.push_back(out.indices.size());
  }
  return out;
}

template <typename T>
NeighborIndex ball_query(const Points<T>& query, const Points<T>& source,
                         double radius, std::size_t max_k) {
  require_xyz(query, "ball_query");
  require_nonempty(source, "ball_query");
  if (!(radius > 0.0)) {
    throw InvalidArgument("ball_query: radius must be positive");
  }
  if (max_k < 1) {
    throw InvalidArgument("ball_query: max_k must be at least 1");
  }
  const double r2 = radius * radius;
  NeighborIndex out;
  std::vector<std::pair<double, int>> cand;
  cand.reserve(source.rows());
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    cand.clear();
    std::pair<double, int> nearest{std::numeric_limits<double>::infinity(), -1};
    for (Eigen::Index j = 0; j < source.rows(); ++j) {
      const double d2 = squared_distance(query, i, source, j);
      nearest = std::min(nearest, std::pair<double, int>{d2, int(j)});
      if (d2 <= r2) cand.emplace_back(d2, int(j));
    }
    if (cand.empty()) cand.push_back(nearest);
    const std::size_t take = std::min(max_k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + std::ptrdiff_t(take), cand.end());
    for (std::size_t j = 0; j < take; ++j) {
      out.indices.push_back(cand[j].second);
      out.distances.push_back(std::sqrt(cand[j].first));
    }
    out.offsets.push_back(out.indices.size());
  }
  return out;
}

template <typename T>
InterpolationWeights interpolation_weights(const Points<T>& query,
                                           const Points<T>& source) {
  constexpr std::size_t K = InterpolationWeights::kNeighbors;
  if (source.rows() < Eigen::Index(K)) {
    throw InvalidArgument("interpolate_features: source needs at least 3 points");
  }
  const NeighborIndex nn = knn(query, source, K);
  InterpolationWeights out;
  out.indices = nn.indices;
  out.weights.resize(nn.indices.size());
  for (std::size_t q = 0; q < nn.queries(); ++q) {
    auto d = nn.neighbor_distances(q);
    double* w = out.weights.data() + q * K;
    if (d[0] < kSnapDistance) {
      w[0] = 1.0;
      w[1] = w[2] = 0.0;
      continue;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
      w[j] = 1.0 / d[j];
      total += w[j];
    }
    for (std::size_t j = 0; j < K; ++j) w[j] /= total;
  }
  return out;
}

template <typename T>
Matrix<T> interpolate_features(const Points<T>& query, const Points<T>& source,
                               const Matrix<T>& source_features) {
  if (source_features.rows() != source.rows()) {
    throw InvalidArgument("interpolate_features: feature rows do not match source points");
  }
  const InterpolationWeights iw = interpolation_weights(query, source);
  Matrix<T> out = Matrix<T>::Zero(query.rows(), source_features.cols());
  for (std::size_t q = 0; q < iw.queries(); ++q) {
    for (std::size_t j = 0; j < InterpolationWeights::kNeighbors; ++j) {
      const std::size_t at = q * InterpolationWeights::kNeighbors + j;
      out.row(Eigen::Index(q)) +=
          T(iw.weights[at]) * source_features.row(iw.indices[at]);
    }
  }
  return out;
}

template <typename T>
double paired_l2_distance(const Points<T>& a, const Points<T>& b) {
  require_nonempty(a, "paired_l2_distance");
  require_xyz(b, "paired_l2_distance");
  if (a.rows() != b.rows()) {
    throw InvalidArgument("paired_l2_distance: clouds differ in size");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    total += std::sqrt(squared_distance(a, i, b, i));
  }
  return total / double(a.rows());
}

template <typename T>
double chamfer_distance(const Points<T>& a, const Points<T>& b) {
  require_nonempty(a, "chamfer_distance");
  require_nonempty(b, "chamfer_distance");
  auto mean_sqrt = [](const std::vector<double>& d2) {
    double s = 0.0;
    for (double v : d2) s += std::sqrt(v);
    return s / double(d2.size());
  };
  return 0.5 * (mean_sqrt(nearest_squared(a, b)) + mean_sqrt(nearest_squared(b, a)));
}

template <typename T>
double hausdorff_distance(const Points<T>& a, const Points<T>& b) {
  require_nonempty(a, "hausdorff_distance");
  require_nonempty(b, "hausdorff_distance");
  const auto ab = nearest_squared(a, b);
  const auto ba = nearest_squared(b, a);
  return std::sqrt(std::max(*std::max_element(ab.begin(), ab.end()),
                            *std::max_element(ba.begin(), ba.end())));
}

template <typename T>
std::vector<double> nearest_neighbor_distances(const Points<T>& cloud) {
  require_xyz(cloud, "nearest_neighbor_distances");
  if (cloud.rows() < 2) {
    throw InvalidArgument("nearest_neighbor_distances: need at least 2 points");
  }
  std::vector<double> out(cloud.rows(), std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < cloud.rows(); ++j) {
      const double d2 = squared_distance(cloud, i, cloud, j);
      out[i] = std::min(out[i], d2);
      out[j] = std::min(out[j], d2);
    }
  }
  for (double& v : out) v = std::sqrt(v);
  std::sort(out.begin(), out.end());
  return out;
}

double kurtosis(std::span<const double> values) {
  if (values.empty()) {
    throw InvalidArgument("kurtosis: empty sample");
  }
  const double n = double(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double d2 = (v - mean) * (v - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  // Relative threshold: a regular lattice gives m2 at rounding level.
  if (!(m2 > 1e-24 * std::max(1.0, mean * mean))) {
    throw UndefinedMetric("kurtosis: zero variance in nearest-neighbor distances");
  }
  return m4 / (m2 * m2);
}

template <typename T>
double kurtosis_metric(const Points<T>& cloud) {
  if (cloud.rows() < 4) {
    throw InvalidArgument("kurtosis_metric: need at least 4 points");
  }
  const auto d = nearest_neighbor_distances(cloud);
  return kurtosis(d);
}

#define PCADV_INSTANTIATE_GEOMETRY(T)                                              \
  template Points<T> normalize_unit_cube(const Points<T>&);                        \
  template std::size_t canonical_seed(const Points<T>&);                           \
  template std::vector<int> farthest_point_sample(const Points<T>&, std::size_t,   \
                                                  std::size_t);                    \
  template NeighborIndex knn(const Points<T>&, const Points<T>&, std::size_t);     \
  template NeighborIndex ball_query(const Points<T>&, const Points<T>&, double,    \
                                    std::size_t);                                  \
  template InterpolationWeights interpolation_weights(const Points<T>&,            \
                                                      const Points<T>&);           \
  template Matrix<T> interpolate_features(const Points<T>&, const Points<T>&,      \
                                          const Matrix<T>&);                       \
  template double paired_l2_distance(const Points<T>&, const Points<T>&);          \
  template double chamfer_distance(const Points<T>&, const Points<T>&);            \
  template double hausdorff_distance(const Points<T>&, const Points<T>&);          \
  template std::vector<double> nearest_neighbor_distances(const Points<T>&);       \
  template double kurtosis_metric(const Points<T>&);

PCADV_INSTANTIATE_GEOMETRY(float)
PCADV_INSTANTIATE_GEOMETRY(double)

#undef PCADV_INSTANTIATE_GEOMETRY

}  // namespace pcadv::geometry
