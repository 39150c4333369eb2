#pragma once

#include "pcadv/nn/tape.hpp"

#include <random>
#include <span>
#include <vector>

namespace pcadv::nn {

template <typename T> Var<T> matmul(Var<T> x, Var<T> w);
/// x * w + b, with the 1 x out bias broadcast over rows.
template <typename T> Var<T> linear(Var<T> x, Var<T> w, Var<T> b);
template <typename T> Var<T> add(Var<T> a, Var<T> b);
template <typename T> Var<T> sub(Var<T> a, Var<T> b);
template <typename T> Var<T> scale(Var<T> a, T s);
template <typename T> Var<T> add_scalar(Var<T> a, T s);
template <typename T> Var<T> relu(Var<T> a);
template <typename T> Var<T> tanh(Var<T> a);
template <typename T> Var<T> concat_cols(std::span<const Var<T>> parts);
template <typename T> Var<T> reshape(Var<T> a, Eigen::Index rows, Eigen::Index cols);

/// out[i] = a[index[i]]; the backward pass scatter-adds.
template <typename T> Var<T> gather_rows(Var<T> a, std::vector<int> index);
/// Elementwise max over consecutive blocks of `group` rows. The gradient
/// goes to the first row attaining each maximum.
template <typename T> Var<T> group_max(Var<T> a, Eigen::Index group);
template <typename T> Var<T> group_sum(Var<T> a, Eigen::Index group);
/// out[q] = sum_j weights[q*k + j] * a[index[q*k + j]] with constant weights.
template <typename T>
Var<T> weighted_rows(Var<T> a, std::vector<int> index, std::vector<double> weights,
                     Eigen::Index k);

/// Per-column standardization over rows (no affine part).
template <typename T> Var<T> standardize_cols(Var<T> a, T eps = T(1e-5));
/// Inverted dropout; `rate` 0 returns `a` unchanged.
template <typename T> Var<T> dropout(Var<T> a, double rate, std::mt19937_64& rng);

template <typename T> Var<T> sum_all(Var<T> a);
template <typename T> Var<T> mean_all(Var<T> a);
template <typename T> Var<T> sum_squares(Var<T> a);

/// -log softmax(logits)[target] for a 1 x C row, max-shifted.
template <typename T> Var<T> softmax_cross_entropy(Var<T> logits, int target);
/// max(max_{i != t} z_i - z_t, -kappa).
template <typename T> Var<T> margin_loss(Var<T> logits, int target, T kappa);

/// Mean over rows of the squared row difference.
template <typename T> Var<T> mean_squared_displacement(Var<T> a, Var<T> b);
/// Symmetric mean of Euclidean nearest distances; matches are fixed at the
/// forward evaluation.
template <typename T> Var<T> chamfer(Var<T> a, Var<T> b);
template <typename T> Var<T> hausdorff(Var<T> a, Var<T> b);

}  // namespace pcadv::nn
