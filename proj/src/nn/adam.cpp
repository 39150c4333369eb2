#include "pcadv/nn/adam.hpp"

#include <cmath>

namespace pcadv::nn {

template <typename T>
void adam_update(Parameter<T>& param, AdamState<T>& state) {
  if (param.grad.rows() != param.value.rows() || param.grad.cols() != param.value.cols()) {
    throw InvalidArgument("adam: gradient shape differs from " + param.name);
  }
  if (!param.grad.allFinite()) {
    throw Divergence("adam: non-finite gradient in " + param.name);
  }
  if (state.first_moment.size() == 0) {
    state.first_moment = Matrix<T>::Zero(param.value.rows(), param.value.cols());
    state.second_moment = Matrix<T>::Zero(param.value.rows(), param.value.cols());
  }
  const AdamConfig& c = state.config;
  state.step += 1;
  const T b1 = T(c.beta1);
  const T b2 = T(c.beta2);
  state.first_moment = b1 * state.first_moment + (T(1) - b1) * param.grad;
  state.second_moment =
      b2 * state.second_moment + (T(1) - b2) * param.grad.cwiseAbs2();
  const double correction1 = 1.0 - std::pow(c.beta1, double(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, double(state.step));
  const T step_size = T(c.learning_rate / correction1);
  const T root_correction = T(std::sqrt(correction2));
  param.value.array() -=
      step_size * state.first_moment.array() /
      (state.second_moment.array().sqrt() / root_correction + T(c.epsilon));
}

template void adam_update(Parameter<float>&, AdamState<float>&);
template void adam_update(Parameter<double>&, AdamState<double>&);

}  // namespace pcadv::nn
