#include "helpers.hpp"

#include "pcadv/victim.hpp"

#include <doctest.h>

#include <numeric>

using namespace pcadv;
using namespace pcadv::victim;
using testing::random_cloud;

namespace {

VictimConfig small_pointnet(int classes = 3) {
  VictimConfig c;
  c.num_classes = classes;
  c.point_widths = {8, 6};
  c.head_widths = {5};
  return c;
}

VictimConfig small_pointnetpp(int classes = 3) {
  VictimConfig c;
  c.architecture = Architecture::pointnetpp;
  c.num_classes = classes;
  c.levels = {{4, 0.6, 3, {5, 6}}, {2, 0.9, 2, {4}}};
  c.global_widths = {5};
  c.pp_head_widths = {4};
  return c;
}

Points<float> reversed(const Points<float>& c) { return c.colwise().reverse(); }

}  // namespace

TEST_CASE("victim logits have one row of C entries") {
  VictimModel<float> pn(VictimConfig{});
  nn::initialize(pn, 1);
  CHECK(pn.logits(random_cloud(256, 1)).cols() == 4);
  VictimConfig ppc;
  ppc.architecture = Architecture::pointnetpp;
  VictimModel<float> pp(ppc);
  nn::initialize(pp, 2);
  const Matrix<float> z = pointnetpp_forward(pp, random_cloud(256, 2));
  CHECK(z.rows() == 1);
  CHECK(z.cols() == 4);
  CHECK_THROWS_AS(pointnet_forward(pp, random_cloud(16, 1)), InvalidArgument);
}

TEST_CASE("victims are invariant to point order") {
  for (const VictimConfig& cfg : {small_pointnet(), small_pointnetpp()}) {
    VictimModel<double> m(cfg);
    nn::initialize(m, 4);
    const Points<double> cloud = random_cloud(24, 3).cast<double>();
    const Matrix<double> a = m.logits(cloud);
    const Matrix<double> b = m.logits(cloud.colwise().reverse());
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("victims accept fewer points than they were built for") {
  VictimModel<float> pp(small_pointnetpp());
  nn::initialize(pp, 5);
  CHECK(pp.logits(random_cloud(3, 1)).cols() == 3);
  VictimModel<float> pn(small_pointnet());
  nn::initialize(pn, 5);
  CHECK(pn.logits(random_cloud(1, 1)).cols() == 3);
  CHECK(pn.predict(reversed(random_cloud(5, 2))) >= 0);
}

TEST_CASE("victim input gradients pass finite differences") {
  for (const VictimConfig& cfg : {small_pointnet(), small_pointnetpp()}) {
    VictimModel<double> m(cfg);
    nn::initialize(m, 6);
    const Points<double> cloud = random_cloud(8, 7).cast<double>();
    auto graph = [&](const std::vector<double>& p) {
      Points<double> x(8, 3);
      std::copy(p.begin(), p.end(), x.data());
      const InputGradient g = input_gradient(m, x, 1);
      return nn::Evaluation{g.loss, std::vector<double>(g.gradient.data(),
                                                        g.gradient.data() + g.gradient.size())};
    };
    const auto r = nn::finite_difference_check(
        graph, std::vector<double>(cloud.data(), cloud.data() + cloud.size()), 1e-4);
    INFO(to_string(cfg.architecture), " ", r.summary());
    CHECK(r.passed);
  }
}

TEST_CASE("victim parameter gradients pass finite differences") {
  VictimConfig cfg = small_pointnet();
  cfg.use_tnet = false;
  VictimModel<double> m(cfg);
  nn::initialize(m, 8);
  const Points<double> cloud = random_cloud(6, 9).cast<double>();
  const auto r = testing::check_parameter_gradient(m, [&](nn::Tape<double>& t) {
    return nn::softmax_cross_entropy(m.forward(t, t.constant(cloud), nn::Trainable::yes), 2);
  });
  INFO(r.summary());
  CHECK(r.passed);
}

TEST_CASE("tnet variant builds and runs") {
  VictimConfig cfg = small_pointnet();
  cfg.use_tnet = true;
  VictimModel<float> m(cfg);
  // Zero parameters give zero features whatever the transform.
  CHECK(m.logits(random_cloud(10, 1)).isZero());
}

TEST_CASE("training a small pointnet separates the toy classes") {
  const auto toy = testing::small_toy(20, 5, 3, 2, 64);
  VictimConfig cfg = small_pointnet(2);
  cfg.point_widths = {32, 64, 128};
  cfg.head_widths = {64};
  cfg.num_points = 64;
  TrainConfig tc;
  tc.epochs = 15;
  const auto a = train_victim(toy.train, toy.test, cfg, tc);
  CHECK(a.test_accuracy >= 90.0);
  CHECK(a.log.size() == 15);
  const auto b = train_victim(toy.train, toy.test, cfg, tc);
  CHECK(nn::flatten_values(a.model) == nn::flatten_values(b.model));
}

TEST_CASE("training rejects class count mismatches") {
  const auto toy = testing::small_toy(2, 1, 1, 2, 64);
  CHECK_THROWS_AS(train_victim(toy.train, toy.test, small_pointnet(3), TrainConfig{}),
                  InvalidArgument);
}

TEST_CASE("shift augmentation is seeded and validated") {
  const auto toy = testing::small_toy(4, 1, 1, 2, 64);
  VictimConfig cfg = small_pointnet(2);
  cfg.num_points = 64;
  TrainConfig tc;
  tc.epochs = 2;
  const auto plain = train_victim(toy.train, toy.test, cfg, tc);
  tc.shift_augment = 0.2;
  const auto a = train_victim(toy.train, toy.test, cfg, tc);
  const auto b = train_victim(toy.train, toy.test, cfg, tc);
  CHECK(nn::flatten_values(a.model) == nn::flatten_values(b.model));
  CHECK(nn::flatten_values(a.model) != nn::flatten_values(plain.model));
  tc.shift_augment = -0.1;
  CHECK_THROWS_AS(train_victim(toy.train, toy.test, cfg, tc), InvalidArgument);
}

TEST_CASE("architecture names parse") {
  CHECK(parse_architecture("pointnet") == Architecture::pointnet);
  CHECK(parse_architecture("pointnet++") == Architecture::pointnetpp);
  CHECK_THROWS_AS(parse_architecture("dgcnn"), InvalidArgument);
}
