#include "helpers.hpp"

#include "pcadv/geometry.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

using namespace pcadv;
using namespace pcadv::geometry;
using testing::random_cloud;

namespace {

double dist2(const Points<float>& a, Eigen::Index i, const Points<float>& b, Eigen::Index j) {
  double s = 0;
  for (int c = 0; c < 3; ++c) {
    const double d = double(a(i, c)) - double(b(j, c));
    s += d * d;
  }
  return s;
}

// Exhaustive greedy maximin: each step scans every unpicked point against
// every picked point.
std::vector<int> greedy_maximin(const Points<float>& cloud, std::size_t m, int seed) {
  std::vector<int> picked{seed};
  while (picked.size() < m) {
    int best = -1;
    double best_d = -1;
    for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
      if (std::find(picked.begin(), picked.end(), int(i)) != picked.end()) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (int p : picked) nearest = std::min(nearest, dist2(cloud, i, cloud, p));
      if (nearest > best_d) {
        best_d = nearest;
        best = int(i);
      }
    }
    picked.push_back(best);
  }
  return picked;
}

double brute_chamfer(const Points<float>& a, const Points<float>& b) {
  auto one_way = [](const Points<float>& x, const Points<float>& y) {
    double total = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < y.rows(); ++j) best = std::min(best, dist2(x, i, y, j));
      total += std::sqrt(best);
    }
    return total / double(x.rows());
  };
  return 0.5 * (one_way(a, b) + one_way(b, a));
}

double brute_hausdorff(const Points<float>& a, const Points<float>& b) {
  auto one_way = [](const Points<float>& x, const Points<float>& y) {
    double worst = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < y.rows(); ++j) best = std::min(best, dist2(x, i, y, j));
      worst = std::max(worst, std::sqrt(best));
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

Points<float> permute_rows(const Points<float>& cloud, std::uint64_t seed) {
  std::vector<int> order(std::size_t(cloud.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Points<float> out(cloud.rows(), 3);
  for (std::size_t i = 0; i < order.size(); ++i) out.row(Eigen::Index(i)) = cloud.row(order[i]);
  return out;
}

}  // namespace

TEST_CASE("normalize_unit_cube centers the box and scales the longest edge to one") {
  Points<float> c(3, 3);
  c << 1, 2, 3,  //
      3, 2, 3,   //
      1, 6, 4;
  const Points<float> n = normalize_unit_cube(c);
  const Eigen::RowVector3f lo = n.colwise().minCoeff(), hi = n.colwise().maxCoeff();
  CHECK((lo + hi).cwiseAbs().maxCoeff() <= 1e-6f);
  CHECK((hi - lo).maxCoeff() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(n(0, 1) == doctest::Approx(-0.5));
}

TEST_CASE("normalize_unit_cube is idempotent") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Points<float> once = normalize_unit_cube(random_cloud(40, seed, 3.0));
    const Points<float> twice = normalize_unit_cube(once);
    CHECK(once == twice);
  }
}

TEST_CASE("normalize_unit_cube rejects non-finite or empty clouds") {
  Points<float> c = random_cloud(4, 1);
  c(2, 1) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(normalize_unit_cube(c), InvalidArgument);
  CHECK_THROWS_AS(normalize_unit_cube(Points<float>(0, 3)), InvalidArgument);
}

TEST_CASE("farthest point sampling matches exhaustive greedy maximin") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto n = Eigen::Index(4 + seed % 29);
    const Points<float> cloud = random_cloud(n, seed);
    for (std::size_t m : {std::size_t(1), std::size_t(n / 2), std::size_t(n)}) {
      if (m == 0) continue;
      const int start = int(seed % std::uint64_t(n));
      CHECK(farthest_point_sample(cloud, m, std::size_t(start)) == greedy_maximin(cloud, m, start));
    }
  }
}

TEST_CASE("farthest point sampling with the canonical seed is permutation invariant") {
  const Points<float> cloud = random_cloud(32, 4);
  const Points<float> shuffled = permute_rows(cloud, 9);
  const auto a = farthest_point_sample(cloud, 8, canonical_seed(cloud));
  const auto b = farthest_point_sample(shuffled, 8, canonical_seed(shuffled));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(cloud.row(a[i]) == shuffled.row(b[i]));
}

TEST_CASE("farthest point sampling rejects bad sizes") {
  const Points<float> cloud = random_cloud(5, 1);
  CHECK_THROWS_AS(farthest_point_sample(cloud, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(farthest_point_sample(cloud, 6, 0), InvalidArgument);
  CHECK_THROWS_AS(farthest_point_sample(cloud, 2, 5), InvalidArgument);
}

TEST_CASE("knn matches a sorted brute-force scan") {
  const Points<float> q = random_cloud(10, 2), s = random_cloud(30, 3);
  const auto index = knn(q, s, 5);
  REQUIRE(index.queries() == 10);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    std::vector<std::pair<double, int>> all;
    for (Eigen::Index j = 0; j < s.rows(); ++j) all.emplace_back(dist2(q, i, s, j), int(j));
    std::sort(all.begin(), all.end());
    auto ids = index.neighbors(std::size_t(i));
    auto ds = index.neighbor_distances(std::size_t(i));
    REQUIRE(ids.size() == 5);
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(ids[j] == all[j].second);
      CHECK(ds[j] == doctest::Approx(std::sqrt(all[j].first)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ball query keeps sorted in-radius neighbors and falls back to the nearest") {
  Points<float> s(4, 3);
  s << 0, 0, 0,  //
      0.1f, 0, 0,  //
      0.25f, 0, 0,  //
      2, 0, 0;
  Points<float> q(2, 3);
  q << 0, 0, 0,  //
      5, 0, 0;
  const auto index = ball_query(q, s, 0.3, 8);
  auto first = index.neighbors(0);
  CHECK(std::vector<int>(first.begin(), first.end()) == std::vector<int>{0, 1, 2});
  auto second = index.neighbors(1);
  CHECK(std::vector<int>(second.begin(), second.end()) == std::vector<int>{3});
  CHECK(index.padded(4) == std::vector<int>{0, 1, 2, 0, 3, 3, 3, 3});
  const auto capped = ball_query(q, s, 0.3, 2);
  CHECK(capped.neighbors(0).size() == 2);
}

TEST_CASE("ball query distances never decrease along a list") {
  const Points<float> q = random_cloud(16, 5), s = random_cloud(64, 6);
  const auto index = ball_query(q, s, 0.4, 32);
  for (std::size_t i = 0; i < index.queries(); ++i) {
    auto d = index.neighbor_distances(i);
    CHECK(std::is_sorted(d.begin(), d.end()));
    for (double v : d) CHECK(v <= 0.4 + 1e-12);
  }
}

TEST_CASE("chamfer and hausdorff match the quadratic brute force") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Points<float> a = random_cloud(Eigen::Index(8 + 9 * seed), seed);
    const Points<float> b = random_cloud(64, seed + 100);
    CHECK(std::abs(chamfer_distance(a, b) - brute_chamfer(a, b)) <= 1e-9);
    CHECK(std::abs(hausdorff_distance(a, b) - brute_hausdorff(a, b)) <= 1e-9);
    CHECK(chamfer_distance(a, a) == 0.0);
    CHECK(hausdorff_distance(b, b) == 0.0);
  }
}

TEST_CASE("paired l2 distance is the mean Euclidean displacement") {
  Points<float> a = Points<float>::Zero(2, 3), b = Points<float>::Zero(2, 3);
  b(0, 0) = 3;
  b(0, 1) = 4;
  CHECK(paired_l2_distance(a, b) == doctest::Approx(2.5));
  CHECK_THROWS_AS(paired_l2_distance(a, Points<float>(Points<float>::Zero(3, 3))), InvalidArgument);
}

TEST_CASE("interpolation weights partition unity and fix constant features") {
  const Points<float> q = random_cloud(20, 7), s = random_cloud(9, 8);
  const auto w = interpolation_weights(q, s);
  REQUIRE(w.queries() == 20);
  for (std::size_t i = 0; i < w.queries(); ++i) {
    double sum = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(w.weights[i * 3 + j] >= 0.0);
      sum += w.weights[i * 3 + j];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  const Matrix<float> constant = Matrix<float>::Constant(9, 4, 2.5f);
  const Matrix<float> out = interpolate_features(q, s, constant);
  CHECK((out.array() - 2.5f).abs().maxCoeff() <= 1e-6f);
}

TEST_CASE("interpolation follows inverse distances and snaps on coincident points") {
  Points<float> s(3, 3);
  s << 0, 0, 0,  //
      1, 0, 0,   //
      0, 3, 0;
  Points<float> q(2, 3);
  q << 0.25f, 0, 0,  //
      1, 0, 0;
  Matrix<float> f(3, 1);
  f << 1, 2, 4;
  // Hand computation: distances 0.25, 0.75 and sqrt(9.0625), weights 1/d
  // normalized.
  const double d[3] = {0.25, 0.75, std::sqrt(0.0625 + 9.0)};
  double num = 0, den = 0;
  for (int i = 0; i < 3; ++i) {
    num += f(i, 0) / d[i];
    den += 1 / d[i];
  }
  const Matrix<float> out = interpolate_features(q, s, f);
  CHECK(out(0, 0) == doctest::Approx(num / den).epsilon(1e-6));
  CHECK(out(1, 0) == 2.0f);
  CHECK_THROWS_AS(interpolation_weights(q, Points<float>(s.topRows(2))), InvalidArgument);
}

TEST_CASE("kurtosis of a hand-computed sample") {
  const std::vector<double> v{1, 2, 3, 4};
  // mean 2.5, m2 = 1.25, m4 = 2.5625
  CHECK(kurtosis(v) == doctest::Approx(2.5625 / (1.25 * 1.25)).epsilon(1e-12));
  const std::vector<double> flat{2, 2, 2};
  CHECK_THROWS_AS(kurtosis(flat), UndefinedMetric);
}

TEST_CASE("kurtosis metric is invariant to scale and permutation") {
  const Points<float> cloud = random_cloud(64, 12);
  const double base = kurtosis_metric(cloud);
  const Points<float> scaled = (cloud * 4.0f).eval();
  CHECK(kurtosis_metric(scaled) == doctest::Approx(base).epsilon(1e-5));
  CHECK(kurtosis_metric(permute_rows(cloud, 3)) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("kurtosis metric spikes with an outlier point") {
  Points<float> cloud = random_cloud(64, 13);
  const double base = kurtosis_metric(cloud);
  cloud.row(0) << 5, 5, 5;
  CHECK(kurtosis_metric(cloud) > base);
  CHECK_THROWS_AS(kurtosis_metric(random_cloud(3, 1)), InvalidArgument);
}

TEST_CASE("nearest neighbor distances are sorted") {
  const auto d = nearest_neighbor_distances(random_cloud(30, 2));
  CHECK(d.size() == 30);
  CHECK(std::is_sorted(d.begin(), d.end()));
}
