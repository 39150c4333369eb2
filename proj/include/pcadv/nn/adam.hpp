#pragma once

#include "pcadv/nn/tape.hpp"

#include <cstdint>
#include <vector>

namespace pcadv::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  Matrix<T> first_moment;
  Matrix<T> second_moment;
  std::int64_t step = 0;
  AdamConfig config;
};

/// One bias-corrected Adam step on `param` from its accumulated gradient.
/// Throws Divergence, leaving both arguments untouched, on a non-finite
/// gradient.
template <typename T>
void adam_update(Parameter<T>& param, AdamState<T>& state);

/// Adam over every parameter of a model, keyed by visit order.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  template <typename M>
  void step(M& model) {
    std::vector<Parameter<T>*> params;
    model.visit([&](Parameter<T>& p) { params.push_back(&p); });
    for (Parameter<T>* p : params) {
      if (!p->grad.allFinite()) {
        throw Divergence("adam: non-finite gradient in " + p->name);
      }
    }
    if (states_.empty()) {
      states_.resize(params.size());
      for (std::size_t i = 0; i < params.size(); ++i) states_[i].config = config_;
    }
    if (states_.size() != params.size()) {
      throw InvalidArgument("adam: parameter set changed between steps");
    }
    for (std::size_t i = 0; i < params.size(); ++i) adam_update(*params[i], states_[i]);
  }

  const AdamConfig& config() const { return config_; }
  std::int64_t steps() const { return states_.empty() ? 0 : states_.front().step; }

 private:
  AdamConfig config_;
  std::vector<AdamState<T>> states_;
};

}  // namespace pcadv::nn
