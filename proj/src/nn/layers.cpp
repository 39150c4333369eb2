#include "pcadv/nn/layers.hpp"

namespace pcadv::nn {

template struct Dense<float>;
template struct Dense<double>;
template struct Mlp<float>;
template struct Mlp<double>;

}  // namespace pcadv::nn
