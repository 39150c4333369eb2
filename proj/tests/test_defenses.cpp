#include "helpers.hpp"

#include "pcadv/attacks.hpp"
#include "pcadv/defenses.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

using namespace pcadv;
using namespace pcadv::defenses;
using testing::random_cloud;

namespace {

// Reference shuffle: the classic descending Fisher-Yates.
std::vector<int> reference_shuffle(std::size_t n, std::uint64_t seed) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(v[i - 1], v[pick(rng)]);
  }
  return v;
}

// Per-point mean distance to the k nearest other points, by brute force.
std::vector<double> mean_knn_distance(const Points<float>& c, int k) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    std::vector<double> d;
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      if (j != i) d.push_back((c.row(i) - c.row(j)).cast<double>().norm());
    }
    std::sort(d.begin(), d.end());
    out.push_back(std::accumulate(d.begin(), d.begin() + k, 0.0) / k);
  }
  return out;
}

std::vector<int> oracle_sor(const Points<float>& c, int k, double alpha) {
  const auto m = mean_knn_distance(c, k);
  const double mu = std::accumulate(m.begin(), m.end(), 0.0) / double(m.size());
  double var = 0.0;
  for (double v : m) var += (v - mu) * (v - mu);
  const double sigma = std::sqrt(var / double(m.size()));
  std::vector<int> keep;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] <= mu + alpha * sigma) keep.push_back(int(i));
  }
  return keep;
}

Points<float> grid(int side) {
  Points<float> g(side * side * side, 3);
  int r = 0;
  for (int x = 0; x < side; ++x)
    for (int y = 0; y < side; ++y)
      for (int z = 0; z < side; ++z) g.row(r++) << float(x), float(y), float(z);
  return g;
}

std::vector<std::vector<float>> sorted_rows(const Points<float>& c) {
  std::vector<std::vector<float>> rows;
  for (Eigen::Index i = 0; i < c.rows(); ++i) rows.push_back({c(i, 0), c(i, 1), c(i, 2)});
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

TEST_CASE("srs keeps the prefix of a reference shuffle") {
  for (std::uint64_t seed : {1, 2, 99}) {
    const auto order = reference_shuffle(256, seed);
    const auto kept = srs_indices(256, 0.75, seed);
    REQUIRE(kept.size() == 64);
    CHECK(kept == std::vector<int>(order.begin(), order.begin() + 64));
  }
  CHECK(srs_indices(10, 0.55, 3).size() == 5);  // ceil(4.5)
  CHECK(srs_indices(10, 0.6, 3).size() == 4);
}

TEST_CASE("srs output is a subset of the input") {
  const Points<float> x = random_cloud(256, 1);
  const Points<float> y = srs_defense(x, 0.75, 5);
  REQUIRE(y.rows() == 64);
  const auto idx = srs_indices(256, 0.75, 5);
  for (Eigen::Index i = 0; i < 64; ++i) CHECK(y.row(i) == x.row(idx[std::size_t(i)]));
  CHECK(sorted_rows(srs_defense(x, 0.0, 5)) == sorted_rows(x));
  CHECK(srs_defense(x, 0.75, 5) == y);
  CHECK_THROWS_AS(srs_defense(x, 1.0, 5), InvalidArgument);
  CHECK_THROWS_AS(srs_defense(x, -0.1, 5), InvalidArgument);
}

TEST_CASE("sor removes a far outlier from a tight cluster") {
  Points<float> c = random_cloud(12, 2, 0.05);
  c.conservativeResize(13, 3);
  c.row(12) << 3.0f, 3.0f, 3.0f;
  const auto kept = sor_indices(c, 3, 0.9);
  CHECK(kept == oracle_sor(c, 3, 0.9));
  std::vector<int> cluster(12);
  std::iota(cluster.begin(), cluster.end(), 0);
  CHECK(kept == cluster);
  CHECK(sor_defense(c, 3, 0.9).rows() == 12);
}

TEST_CASE("sor keeps a grid above the oracle threshold") {
  const Points<float> g = grid(4);
  const auto m = mean_knn_distance(g, 6);
  const double mu = std::accumulate(m.begin(), m.end(), 0.0) / double(m.size());
  double var = 0.0;
  for (double v : m) var += (v - mu) * (v - mu);
  const double sigma = std::sqrt(var / double(m.size()));
  REQUIRE(sigma > 0);
  const double threshold = (*std::max_element(m.begin(), m.end()) - mu) / sigma;
  CHECK(sor_indices(g, 6, threshold + 1e-6).size() == 64);
  CHECK(sor_indices(g, 6, threshold - 1e-3).size() < 64);
  CHECK(sor_indices(g, 6, 0.9) == oracle_sor(g, 6, 0.9));
  // With k = 3 every grid point has three unit neighbors.
  CHECK(sor_indices(g, 3, 0.0).size() == 64);
}

TEST_CASE("sor with unbounded alpha is the identity") {
  const Points<float> x = random_cloud(40, 3);
  CHECK(sor_defense(x, 5, std::numeric_limits<double>::infinity()) == x);
  CHECK(sor_indices(x, 12, 0.9) == oracle_sor(x, 12, 0.9));
  CHECK_THROWS_AS(sor_defense(x, 40, 0.9), InvalidArgument);
  CHECK_THROWS_AS(sor_defense(x, 0, 0.9), InvalidArgument);
}

TEST_CASE("recentering removes translations") {
  Points<float> centered(4, 3);
  centered << 1, 0, -0.5, -1, 0, 0.5, 0.25, 2, 0, -0.25, -2, 0;
  CHECK(recenter_defense(centered) == centered);
  Points<float> moved = centered;
  moved.rowwise() += Eigen::RowVector3f(0.5f, -0.25f, 1.0f);
  CHECK(recenter_defense(moved) == centered);

  const Points<float> x = random_cloud(64, 4);
  for (double eps : {0.0, 0.01, 0.1, 0.5, 1.0, 2.0}) {
    const Points<float> y = recenter_defense(attacks::translation_attack(x, eps, 7));
    CHECK(y.cast<double>().colwise().mean().cwiseAbs().maxCoeff() < 1e-6);
    CHECK((y - recenter_defense(x)).cwiseAbs().maxCoeff() < 1e-5f);
  }
  CHECK_THROWS_AS(recenter_defense(Points<float>(0, 3)), InvalidArgument);
}
