#include "pcadv/defenses.hpp"

#include "pcadv/geometry.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace pcadv::defenses {

namespace {

Points<float> take_rows(const Points<float>& cloud, const std::vector<int>& rows) {
  Points<float> out(Eigen::Index(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(Eigen::Index(i)) = cloud.row(rows[i]);
  return out;
}

}  // namespace

std::vector<int> srs_indices(std::size_t n, double drop_ratio, std::uint64_t seed) {
  if (!(drop_ratio >= 0.0) || !(drop_ratio < 1.0)) {
    throw InvalidArgument("srs_defense: drop ratio must lie in [0, 1)");
  }
  // The small slack keeps e.g. 256 * (1 - 0.75) at 64 despite rounding.
  const auto keep = std::size_t(std::ceil(double(n) * (1.0 - drop_ratio) - 1e-9));
  if (keep < 1) throw InvalidArgument("srs_defense: drop ratio leaves no point");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  order.resize(keep);
  return order;
}

Points<float> srs_defense(const Points<float>& cloud, double drop_ratio, std::uint64_t seed) {
  return take_rows(cloud, srs_indices(std::size_t(cloud.rows()), drop_ratio, seed));
}

std::vector<int> sor_indices(const Points<float>& cloud, int k, double alpha) {
  const auto n = std::size_t(cloud.rows());
  if (k < 1 || std::size_t(k) >= n) {
    throw InvalidArgument("sor_defense: need 1 <= k < N (k = " + std::to_string(k) +
                          ", N = " + std::to_string(n) + ")");
  }
  const geometry::NeighborIndex nn = geometry::knn(cloud, cloud, std::size_t(k) + 1);
  std::vector<double> mean(n);
  for (std::size_t q = 0; q < n; ++q) {
    auto idx = nn.neighbors(q);
    auto dist = nn.neighbor_distances(q);
    double sum = 0.0;
    int used = 0;
    bool skipped = false;
    for (std::size_t j = 0; j < idx.size() && used < k; ++j) {
      if (!skipped && idx[j] == int(q)) {
        skipped = true;
        continue;
      }
      sum += dist[j];
      ++used;
    }
    mean[q] = sum / used;
  }
  const double mu = std::accumulate(mean.begin(), mean.end(), 0.0) / double(n);
  double var = 0.0;
  for (double m : mean) var += (m - mu) * (m - mu);
  const double sigma = std::sqrt(var / double(n));
  const double threshold = mu + alpha * sigma;
  std::vector<int> keep;
  for (std::size_t q = 0; q < n; ++q) {
    if (!(mean[q] > threshold)) keep.push_back(int(q));
  }
  return keep;
}

Points<float> sor_defense(const Points<float>& cloud, int k, double alpha) {
  return take_rows(cloud, sor_indices(cloud, k, alpha));
}

Points<float> recenter_defense(const Points<float>& cloud) {
  if (cloud.rows() < 1) throw InvalidArgument("recenter_defense: empty cloud");
  const Eigen::RowVector3d centroid = cloud.cast<double>().colwise().mean();
  Points<float> out = cloud;
  out.rowwise() -= centroid.cast<float>();
  return out;
}

}  // namespace pcadv::defenses
