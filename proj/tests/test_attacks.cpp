#include "helpers.hpp"

#include "pcadv/attacks.hpp"

#include <doctest.h>

#include <cmath>

using namespace pcadv;
using namespace pcadv::attacks;
using testing::random_cloud;

namespace {

victim::VictimModel<float> small_victim(std::uint64_t seed = 3) {
  victim::VictimConfig c;
  c.num_classes = 3;
  c.point_widths = {8, 16};
  c.head_widths = {8};
  victim::VictimModel<float> m(c);
  nn::initialize(m, seed);
  return m;
}

int other_class(int c) { return (c + 1) % 3; }

}  // namespace

TEST_CASE("fgsm with zero budget returns the input") {
  auto v = small_victim();
  const Points<float> x = random_cloud(32, 1);
  const Points<float> copy = x;
  AttackBudget b;
  b.eps = 0;
  const auto r = fgsm_targeted(v, x, other_class(v.predict(x)), b);
  CHECK(r.adversarial == x);
  CHECK(x == copy);
  CHECK(r.victim_queries >= 1);
}

TEST_CASE("fgsm moves every coordinate by eps against the gradient sign") {
  auto v = small_victim();
  const Points<float> x = random_cloud(32, 2);
  const int t = other_class(v.predict(x));
  AttackBudget b;
  b.eps = 0.02;
  const auto r = fgsm_targeted(v, x, t, b);
  const Points<double> g = victim::input_gradient(v, x, t).gradient;
  const Points<double> d = (r.adversarial - x).cast<double>();
  int moved = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double gi = g.data()[i];
    if (gi == 0.0) continue;
    ++moved;
    CHECK(d.data()[i] == doctest::Approx(gi > 0 ? -0.02 : 0.02).epsilon(1e-5));
  }
  CHECK(moved > 0);
}

TEST_CASE("ifgm respects its l2 budget") {
  auto v = small_victim();
  for (std::uint64_t seed : {1, 2, 3}) {
    const Points<float> x = random_cloud(32, seed);
    for (double eps : {0.05, 0.3, 1.0}) {
      AttackBudget b;
      b.eps = eps;
      const auto r = ifgm_targeted(v, x, other_class(v.predict(x)), b);
      const double norm = (r.adversarial - x).cast<double>().norm();
      CHECK(norm <= eps);
    }
  }
}

TEST_CASE("one ifgm step is a single normalized gradient step") {
  auto v = small_victim();
  const Points<float> x = random_cloud(32, 4);
  const int t = other_class(v.predict(x));
  AttackBudget b;
  b.eps = 0.1;
  b.steps = 1;
  const auto r = ifgm_targeted(v, x, t, b);
  const Points<double> g = victim::input_gradient(v, x, t).gradient;
  const Points<double> expected = x.cast<double>() - 0.1 * g / g.norm();
  CHECK((r.adversarial.cast<double>() - expected).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("ifgm stops on a zero gradient") {
  auto v = small_victim();
  v.visit([](auto& p) { p.value.setZero(); });
  const Points<float> x = random_cloud(16, 5);
  const auto r = ifgm_targeted(v, x, 1, AttackBudget{});
  CHECK(r.status == "zero-gradient");
  CHECK(r.adversarial == x);
}

TEST_CASE("cw on an input already classified as the target returns it") {
  auto v = small_victim();
  const Points<float> x = random_cloud(16, 6);
  for (DistanceMode mode : {DistanceMode::l2, DistanceMode::chamfer, DistanceMode::hausdorff}) {
    const auto r = cw_attack(v, x, v.predict(x), mode, AttackBudget{});
    CHECK(r.success);
    CHECK(r.adversarial == x);
    CHECK(r.l2 == 0.0);
  }
}

TEST_CASE("cw reports failure with the unmodified cloud") {
  auto v = small_victim();
  const Points<float> x = random_cloud(16, 7);
  AttackBudget b;
  b.cw_steps = 1;
  b.binary_search_rounds = 1;
  b.cw_learning_rate = 1e-7;
  const auto r = cw_attack(v, x, other_class(v.predict(x)), DistanceMode::l2, b);
  CHECK_FALSE(r.success);
  CHECK(r.status == "failed");
  CHECK(r.adversarial == x);
}

TEST_CASE("cw finds a close targeted adversary on an untrained victim") {
  auto v = small_victim();
  const Points<float> x = random_cloud(16, 8);
  const int t = other_class(v.predict(x));
  AttackBudget b;
  b.cw_steps = 100;
  b.binary_search_rounds = 3;
  const auto r = cw_attack(v, x, t, DistanceMode::l2, b);
  CHECK(r.success);
  CHECK(v.predict(r.adversarial) == t);
  CHECK(r.l2 > 0.0);
}

TEST_CASE("translation is a single rigid offset") {
  const Points<float> x = random_cloud(20, 9);
  CHECK(translation_attack(x, 0.0, 1) == x);
  for (double eps : {0.01, 0.5, 2.0}) {
    const Points<float> y = translation_attack(x, eps, 4);
    const Eigen::RowVector3f offset = y.row(0) - x.row(0);
    CHECK(offset.cwiseAbs().maxCoeff() <= float(eps));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      CHECK(((y.row(i) - x.row(i)) - offset).cwiseAbs().maxCoeff() < 1e-5f);
      for (Eigen::Index j = 0; j < i; ++j) {
        const double before = (x.row(i) - x.row(j)).cast<double>().norm();
        const double after = (y.row(i) - y.row(j)).cast<double>().norm();
        CHECK(after == doctest::Approx(before).epsilon(1e-5));
      }
    }
  }
  CHECK(translation_attack(x, 1.0, 4) == translation_attack(x, 1.0, 4));
  CHECK(translation_attack(x, 1.0, 4) != translation_attack(x, 1.0, 5));
  CHECK_THROWS_AS(translation_attack(x, -1.0, 1), InvalidArgument);
}

TEST_CASE("translation signs and magnitudes are spread over their ranges") {
  const Points<float> x = Points<float>::Zero(1, 3);
  int negative = 0;
  double largest = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Points<float> y = translation_attack(x, 1.0, s);
    negative += int(y(0, 0) < 0);
    largest = std::max(largest, double(std::abs(y(0, 1))));
  }
  CHECK(negative > 70);
  CHECK(negative < 130);
  CHECK(largest > 0.95);
}

TEST_CASE("budgets validate and distance modes parse") {
  AttackBudget b;
  CHECK_NOTHROW(b.validate());
  CHECK(b.effective_step_size() == doctest::Approx(0.03));
  b.steps = 0;
  CHECK_THROWS_AS(b.validate(), InvalidArgument);
  b = AttackBudget{};
  b.eps = -0.1;
  CHECK_THROWS_AS(b.validate(), InvalidArgument);
  CHECK(parse_distance_mode(to_string(DistanceMode::hausdorff)) == DistanceMode::hausdorff);
  CHECK_THROWS_AS(parse_distance_mode("emd"), InvalidArgument);
}
