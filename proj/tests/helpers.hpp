#pragma once

// Shared fixtures for the test programs: random matrices, finite-difference
// drivers over tape graphs, and a seeded toy dataset.

#include "pcadv/dataset.hpp"
#include "pcadv/nn/gradcheck.hpp"
#include "pcadv/nn/layers.hpp"

#include <random>
#include <vector>

namespace testing {

using pcadv::Matrix;
using pcadv::Points;

inline Matrix<double> random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                                    double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

inline Points<float> random_cloud(Eigen::Index n, std::uint64_t seed, double half = 0.5) {
  return random_matrix(n, 3, seed, -half, half).cast<float>();
}

/// Reduces any matrix node to a scalar through fixed random projections,
/// so every output entry contributes with a distinct weight.
inline pcadv::nn::Var<double> project(pcadv::nn::Tape<double>& tape, pcadv::nn::Var<double> v,
                                      std::uint64_t seed = 99) {
  using namespace pcadv::nn;
  Var<double> cols = matmul(v, tape.constant(random_matrix(v.cols(), 1, seed)));
  Var<double> row = reshape(cols, 1, cols.rows());
  return matmul(row, tape.constant(random_matrix(row.cols(), 1, seed + 1)));
}

/// Finite-difference check of d build(x) / dx where build maps a tape input
/// of x0's shape to a 1 x 1 node.
template <typename Build>
pcadv::nn::GradCheckReport check_input_gradient(const Matrix<double>& x0, Build build,
                                                double tolerance = 1e-4,
                                                pcadv::nn::GradCheckOptions options = {}) {
  using namespace pcadv::nn;
  auto graph = [&](const std::vector<double>& p) {
    Matrix<double> x(x0.rows(), x0.cols());
    std::copy(p.begin(), p.end(), x.data());
    Tape<double> tape;
    Var<double> in = tape.input(x);
    Var<double> out = build(tape, in);
    tape.backward(out);
    Evaluation e;
    e.value = out.item();
    e.gradient.assign(p.size(), 0.0);
    if (in.grad().size()) std::copy(in.grad().data(), in.grad().data() + p.size(), e.gradient.begin());
    return e;
  };
  return finite_difference_check(graph, std::vector<double>(x0.data(), x0.data() + x0.size()),
                                 tolerance, options);
}

/// Finite-difference check over every parameter of `model`, where
/// build(tape) evaluates the scalar objective with trainable parameters.
template <typename Model, typename Build>
pcadv::nn::GradCheckReport check_parameter_gradient(Model& model, Build build,
                                                    double tolerance = 1e-4,
                                                    pcadv::nn::GradCheckOptions options = {}) {
  using namespace pcadv::nn;
  auto graph = [&](const std::vector<double>& p) {
    assign_values(model, p);
    zero_grad(model);
    Tape<double> tape;
    Var<double> out = build(tape);
    tape.backward(out);
    return Evaluation{out.item(), flatten_grads(model)};
  };
  return finite_difference_check(graph, flatten_values(model), tolerance, options);
}

inline pcadv::data::SplitDataset small_toy(int per_class_train, int per_class_test,
                                           std::uint64_t seed, int classes = 4, int n = 64) {
  pcadv::data::ToyConfig cfg;
  cfg.num_classes = classes;
  cfg.num_points = n;
  cfg.train_per_class = per_class_train;
  cfg.test_per_class = per_class_test;
  return pcadv::data::make_toy_dataset(cfg, seed);
}

}  // namespace testing
