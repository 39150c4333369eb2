#pragma once

#include "pcadv/nn/ops.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pcadv::nn {

/// Fully connected layer applied independently to every row.
template <typename T>
struct Dense {
  Parameter<T> weight;  // in x out
  Parameter<T> bias;    // 1 x out

  Dense() = default;
  Dense(const std::string& name, Eigen::Index in, Eigen::Index out)
      : weight(name + ".weight", in, out), bias(name + ".bias", 1, out) {}

  Eigen::Index in() const { return weight.value.rows(); }
  Eigen::Index out() const { return weight.value.cols(); }

  Var<T> forward(Tape<T>& tape, Var<T> x, Trainable trainable) {
    return linear(x, tape.parameter(weight, trainable), tape.parameter(bias, trainable));
  }

  template <typename F> void visit(F&& f) { f(weight); f(bias); }
  template <typename F> void visit(F&& f) const { f(weight); f(bias); }
};

/// Shared per-point MLP. ReLU follows every layer except a terminal last
/// layer; optional per-cloud channel standardization precedes each ReLU.
template <typename T>
struct Mlp {
  std::vector<Dense<T>> layers;
  bool terminal_last = false;
  bool normalize = false;

  Mlp() = default;
  Mlp(const std::string& name, Eigen::Index in, std::span<const int> widths,
      bool terminal_last_layer = false, bool normalized = false)
      : terminal_last(terminal_last_layer), normalize(normalized) {
    Eigen::Index width = in;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      layers.emplace_back(name + "." + std::to_string(i), width, widths[i]);
      width = widths[i];
    }
  }

  Eigen::Index in() const { return layers.empty() ? 0 : layers.front().in(); }
  Eigen::Index out() const { return layers.empty() ? 0 : layers.back().out(); }

  Var<T> forward(Tape<T>& tape, Var<T> x, Trainable trainable) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      x = layers[i].forward(tape, x, trainable);
      const bool terminal = terminal_last && i + 1 == layers.size();
      if (!terminal) {
        if (normalize && x.rows() > 1) x = standardize_cols(x);
        x = relu(x);
      }
    }
    return x;
  }

  template <typename F> void visit(F&& f) { for (auto& l : layers) l.visit(f); }
  template <typename F> void visit(F&& f) const { for (const auto& l : layers) l.visit(f); }
};

/// Applies `mlp` to every row of `features`.
template <typename T>
Var<T> pointwise_mlp(Tape<T>& tape, Var<T> features, Mlp<T>& mlp,
                     Trainable trainable = Trainable::yes) {
  if (features.cols() != mlp.in()) {
    throw InvalidArgument("pointwise_mlp: input width " + std::to_string(features.cols()) +
                          " does not match first layer input " + std::to_string(mlp.in()));
  }
  return mlp.forward(tape, features, trainable);
}

/// Elementwise max over consecutive groups of `group_size` rows.
template <typename T>
Var<T> max_pool_group(Var<T> grouped_features, Eigen::Index group_size) {
  if (group_size < 1) throw InvalidArgument("max_pool_group: empty group");
  return group_max(grouped_features, group_size);
}

// ---------------------------------------------------------------------------
// Parameter-set utilities over any model exposing visit().

/// Fan-in scaled uniform initialization: weights ~ U(-b, b) with
/// b = sqrt(6 / fan_in), biases zero. Visit order fixes the draw order.
template <typename M>
void initialize(M& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  model.visit([&](auto& p) {
    using T = typename std::decay_t<decltype(p.value)>::Scalar;
    if (p.value.rows() == 1 && p.name.ends_with(".bias")) {
      p.value.setZero();
    } else {
      const double bound = std::sqrt(6.0 / double(std::max<Eigen::Index>(1, p.value.rows())));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = T(u(rng));
    }
    p.zero_grad();
  });
}

template <typename M>
void zero_grad(M& model) {
  model.visit([](auto& p) { p.zero_grad(); });
}

template <typename M>
std::size_t parameter_count(const M& model) {
  std::size_t n = 0;
  model.visit([&](const auto& p) { n += std::size_t(p.value.size()); });
  return n;
}

template <typename M>
std::vector<double> flatten_values(const M& model) {
  std::vector<double> out;
  model.visit([&](const auto& p) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) out.push_back(double(p.value.data()[i]));
  });
  return out;
}

template <typename M>
std::vector<double> flatten_grads(const M& model) {
  std::vector<double> out;
  model.visit([&](const auto& p) {
    for (Eigen::Index i = 0; i < p.grad.size(); ++i) out.push_back(double(p.grad.data()[i]));
  });
  return out;
}

template <typename M>
void assign_values(M& model, std::span<const double> flat) {
  std::size_t at = 0;
  model.visit([&](auto& p) {
    using T = typename std::decay_t<decltype(p.value)>::Scalar;
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = T(flat[at++]);
  });
  if (at != flat.size()) throw InvalidArgument("assign_values: parameter count mismatch");
}

/// Copies parameter values between two models of the same architecture,
/// possibly of different scalar types.
template <typename Src, typename Dst>
void copy_values(const Src& src, Dst& dst) {
  const std::vector<double> flat = flatten_values(src);
  if (flat.size() != parameter_count(dst)) {
    throw InvalidArgument("copy_values: architectures differ");
  }
  assign_values(dst, flat);
}

}  // namespace pcadv::nn
