#include "pcadv/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pcadv::nn {

template <typename T>
Var<T> Tape<T>::constant(Matrix<T> value) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  return {this, nodes_.size() - 1};
}

template <typename T>
Var<T> Tape<T>::constant_ref(const Matrix<T>& value) {
  Node& n = nodes_.emplace_back();
  n.ref = &value;
  return {this, nodes_.size() - 1};
}

template <typename T>
Var<T> Tape<T>::input(Matrix<T> value) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = true;
  return {this, nodes_.size() - 1};
}

template <typename T>
Var<T> Tape<T>::parameter(Parameter<T>& p, Trainable trainable) {
  Node& n = nodes_.emplace_back();
  n.ref = &p.value;
  if (trainable == Trainable::yes) {
    n.param = &p;
    n.requires_grad = true;
  }
  return {this, nodes_.size() - 1};
}

template <typename T>
Var<T> Tape<T>::record(Matrix<T> value, std::initializer_list<Var<T>> parents,
                       Backward backward) {
  bool rg = false;
  for (const Var<T>& p : parents) rg = rg || requires_grad(p.id());
  return record(std::move(value), rg, std::move(backward));
}

template <typename T>
Var<T> Tape<T>::record(Matrix<T> value, bool rg, Backward backward) {
  Node& n = nodes_.emplace_back();
  n.owned = std::move(value);
  n.requires_grad = rg;
  if (rg) n.backward = std::move(backward);
  return {this, nodes_.size() - 1};
}

template <typename T>
const Matrix<T>& Tape<T>::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.ref ? *n.ref : n.owned;
}

template <typename T>
Matrix<T>& Tape<T>::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) {
    const Matrix<T>& v = value(id);
    n.grad = Matrix<T>::Zero(v.rows(), v.cols());
  }
  return n.grad;
}

template <typename T>
void Tape<T>::backward(Var<T> output) {
  if (output.rows() != 1 || output.cols() != 1) {
    throw InvalidArgument("backward: output must be a 1 x 1 scalar");
  }
  if (!requires_grad(output.id())) return;
  grad_buffer(output.id())(0, 0) += T(1);
  for (std::size_t id = output.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param) n.param->grad += n.grad;
  }
}

namespace {

template <typename T>
void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

template <typename T>
std::vector<double> pair_nearest(const Matrix<T>& a, const Matrix<T>& b,
                                 std::vector<int>& match) {
  std::vector<double> dist(a.rows());
  match.assign(a.rows(), 0);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const double d2 = (a.row(i) - b.row(j)).template cast<double>().squaredNorm();
      if (d2 < best) {
        best = d2;
        match[i] = int(j);
      }
    }
    dist[i] = std::sqrt(best);
  }
  return dist;
}

// Adds `weight * d|a_i - b_j| / d a_i` to ga and the negation to gb.
template <typename T>
void distance_grad(Tape<T>& t, Var<T> a, Var<T> b, Eigen::Index i, Eigen::Index j,
                   double dist, T weight) {
  if (dist <= 0.0) return;
  const Eigen::Matrix<T, 1, Eigen::Dynamic> dir =
      (a.value().row(i) - b.value().row(j)) * T(double(weight) / dist);
  if (a.requires_grad()) t.grad_buffer(a.id()).row(i) += dir;
  if (b.requires_grad()) t.grad_buffer(b.id()).row(j) -= dir;
}

}  // namespace

template <typename T>
Var<T> matmul(Var<T> x, Var<T> w) {
  require<T>(x.cols() == w.rows(), "matmul: inner dimensions differ (" +
                                       std::to_string(x.cols()) + " vs " +
                                       std::to_string(w.rows()) + ")");
  Matrix<T> out = x.value() * w.value();
  return x.tape()->record(std::move(out), {x, w}, [x, w](Tape<T>& t, const Matrix<T>& g) {
    if (x.requires_grad()) t.grad_buffer(x.id()).noalias() += g * w.value().transpose();
    if (w.requires_grad()) t.grad_buffer(w.id()).noalias() += x.value().transpose() * g;
  });
}

template <typename T>
Var<T> linear(Var<T> x, Var<T> w, Var<T> b) {
  require<T>(x.cols() == w.rows(), "linear: input width " + std::to_string(x.cols()) +
                                       " does not match layer input " +
                                       std::to_string(w.rows()));
  require<T>(b.rows() == 1 && b.cols() == w.cols(), "linear: bias shape mismatch");
  Matrix<T> out = x.value() * w.value();
  out.rowwise() += b.value().row(0);
  return x.tape()->record(std::move(out), {x, w, b}, [x, w, b](Tape<T>& t, const Matrix<T>& g) {
    if (x.requires_grad()) t.grad_buffer(x.id()).noalias() += g * w.value().transpose();
    if (w.requires_grad()) t.grad_buffer(w.id()).noalias() += x.value().transpose() * g;
    if (b.requires_grad()) t.grad_buffer(b.id()) += g.colwise().sum();
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  require<T>(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  return a.tape()->record(a.value() + b.value(), {a, b}, [a, b](Tape<T>& t, const Matrix<T>& g) {
    if (a.requires_grad()) t.grad_buffer(a.id()) += g;
    if (b.requires_grad()) t.grad_buffer(b.id()) += g;
  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  require<T>(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shape mismatch");
  return a.tape()->record(a.value() - b.value(), {a, b}, [a, b](Tape<T>& t, const Matrix<T>& g) {
    if (a.requires_grad()) t.grad_buffer(a.id()) += g;
    if (b.requires_grad()) t.grad_buffer(b.id()) -= g;
  });
}

template <typename T>
Var<T> scale(Var<T> a, T s) {
  return a.tape()->record(a.value() * s, {a}, [a, s](Tape<T>& t, const Matrix<T>& g) {
    t.grad_buffer(a.id()) += g * s;
  });
}

template <typename T>
Var<T> add_scalar(Var<T> a, T s) {
  Matrix<T> out = a.value().array() + s;
  return a.tape()->record(std::move(out), {a}, [a](Tape<T>& t, const Matrix<T>& g) {
    t.grad_buffer(a.id()) += g;
  });
}

template <typename T>
Var<T> relu(Var<T> a) {
  Matrix<T> out = a.value().cwiseMax(T(0));
  return a.tape()->record(std::move(out), {a}, [a](Tape<T>& t, const Matrix<T>& g) {
    t.grad_buffer(a.id()).array() +=
        (a.value().array() > T(0)).select(g.array(), T(0));
  });
}

template <typename T>
Var<T> tanh(Var<T> a) {
  Matrix<T> out = a.value().array().tanh().matrix();
  return a.tape()->record(Matrix<T>(out), {a}, [a, out](Tape<T>& t, const Matrix<T>& g) {
    t.grad_buffer(a.id()).array() += g.array() * (T(1) - out.array().square());
  });
}

template <typename T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  require<T>(!parts.empty(), "concat_cols: nothing to concatenate");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  bool rg = false;
  for (const Var<T>& p : parts) {
    require<T>(p.rows() == rows, "concat_cols: row counts differ");
    cols += p.cols();
    rg = rg || p.requires_grad();
  }
  Matrix<T> out(rows, cols);
  Eigen::Index at = 0;
  for (const Var<T>& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  std::vector<Var<T>> kept(parts.begin(), parts.end());
  return parts[0].tape()->record(std::move(out), rg, [kept](Tape<T>& t, const Matrix<T>& g) {
    Eigen::Index off = 0;
    for (const Var<T>& p : kept) {
      if (p.requires_grad()) t.grad_buffer(p.id()) += g.middleCols(off, p.cols());
      off += p.cols();
    }
  });
}

template <typename T>
Var<T> reshape(Var<T> a, Eigen::Index rows, Eigen::Index cols) {
  require<T>(rows * cols == a.value().size(), "reshape: element count differs");
  Matrix<T> out = Eigen::Map<const Matrix<T>>(a.value().data(), rows, cols);
  return a.tape()->record(std::move(out), {a}, [a](Tape<T>& t, const Matrix<T>& g) {
    t.grad_buffer(a.id()) += Eigen::Map<const Matrix<T>>(g.data(), a.rows(), a.cols());
  });
}

template <typename T>
Var<T> gather_rows(Var<T> a, std::vector<int> index) {
  const Matrix<T>& src = a.value();
  Matrix<T> out(Eigen::Index(index.size()), src.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    require<T>(index[i] >= 0 && index[i] < src.rows(), "gather_rows: index out of range");
    out.row(Eigen::Index(i)) = src.row(index[i]);
  }
  return a.tape()->record(std::move(out), {a},
                          [a, index = std::move(index)](Tape<T>& t, const Matrix<T>& g) {
                            Matrix<T>& ga = t.grad_buffer(a.id());
                            for (std::size_t i = 0; i < index.size(); ++i) {
                              ga.row(index[i]) += g.row(Eigen::Index(i));
                            }
                          });
}

template <typename T>
Var<T> group_max(Var<T> a, Eigen::Index group) {
  const Matrix<T>& src = a.value();
  require<T>(group >= 1 && src.rows() >= group && src.rows() % group == 0,
             "group_max: rows must split into non-empty groups");
  const Eigen::Index groups = src.rows() / group;
  const Eigen::Index cols = src.cols();
  Matrix<T> out(groups, cols);
  std::vector<Eigen::Index> arg(std::size_t(groups * cols));
  for (Eigen::Index gi = 0; gi < groups; ++gi) {
    const Eigen::Index base = gi * group;
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(gi, c) = src(base, c);
      arg[std::size_t(gi * cols + c)] = base;
    }
    for (Eigen::Index r = base + 1; r < base + group; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (src(r, c) > out(gi, c)) {
          out(gi, c) = src(r, c);
          arg[std::size_t(gi * cols + c)] = r;
        }
      }
    }
  }
  return a.tape()->record(std::move(out), {a},
                          [a, arg = std::move(arg), cols](Tape<T>& t, const Matrix<T>& g) {
                            Matrix<T>& ga = t.grad_buffer(a.id());
                            for (Eigen::Index gi = 0; gi < g.rows(); ++gi) {
                              for (Eigen::Index c = 0; c < cols; ++c) {
                                ga(arg[std::size_t(gi * cols + c)], c) += g(gi, c);
                              }
                            }
                          });
}

template <typename T>
Var<T> group_sum(Var<T> a, Eigen::Index group) {
  const Matrix<T>& src = a.value();
  require<T>(group >= 1 && src.rows() % group == 0, "group_sum: rows must split into groups");
  const Eigen::Index groups = src.rows() / group;
  Matrix<T> out = Matrix<T>::Zero(groups, src.cols());
  for (Eigen::Index r = 0; r < src.rows(); ++r) out.row(r / group) += src.row(r);
  return a.tape()->record(std::move(out), {a}, [a, group](Tape<T>& t, const Matrix<T>& g) {
    Matrix<T>& ga = t.grad_buffer(a.id());
    for (Eigen::Index r = 0; r < ga.rows(); ++r) ga.row(r) += g.row(r / group);
  });
}

template <typename T>
Var<T> weighted_rows(Var<T> a, std::vector<int> index, std::vector<double> weights,
                     Eigen::Index k) {
  require<T>(k >= 1 && index.size() == weights.size() && index.size() % std::size_t(k) == 0,
             "weighted_rows: index/weight layout mismatch");
  const Matrix<T>& src = a.value();
  const Eigen::Index queries = Eigen::Index(index.size()) / k;
  Matrix<T> out = Matrix<T>::Zero(queries, src.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    require<T>(index[i] >= 0 && index[i] < src.rows(), "weighted_rows: index out of range");
    out.row(Eigen::Index(i) / k) += T(weights[i]) * src.row(index[i]);
  }
  return a.tape()->record(
      std::move(out), {a},
      [a, k, index = std::move(index), weights = std::move(weights)](Tape<T>& t,
                                                                      const Matrix<T>& g) {
        Matrix<T>& ga = t.grad_buffer(a.id());
        for (std::size_t i = 0; i < index.size(); ++i) {
          ga.row(index[i]) += T(weights[i]) * g.row(Eigen::Index(i) / k);
        }
      });
}

template <typename T>
Var<T> standardize_cols(Var<T> a, T eps) {
  const Matrix<T>& x = a.value();
  const T n = T(x.rows());
  const Eigen::Matrix<T, 1, Eigen::Dynamic> mean = x.colwise().mean();
  Matrix<T> centered = x.rowwise() - mean;
  const Eigen::Matrix<T, 1, Eigen::Dynamic> inv_std =
      ((centered.array().square().colwise().sum() / n) + eps).rsqrt().matrix();
  Matrix<T> y = centered.array().rowwise() * inv_std.array();
  Matrix<T> y_copy = y;
  return a.tape()->record(
      std::move(y), {a}, [a, n, inv_std, y = std::move(y_copy)](Tape<T>& t, const Matrix<T>& g) {
        const Eigen::Matrix<T, 1, Eigen::Dynamic> g_sum = g.colwise().sum();
        const Eigen::Matrix<T, 1, Eigen::Dynamic> gy_sum = g.cwiseProduct(y).colwise().sum();
        Matrix<T> gx = (g * n).rowwise() - g_sum;
        gx -= (y.array().rowwise() * gy_sum.array()).matrix();
        gx = (gx.array().rowwise() * (inv_std.array() / n)).matrix();
        t.grad_buffer(a.id()) += gx;
      });
}

template <typename T>
Var<T> dropout(Var<T> a, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return a;
  require<T>(rate < 1.0, "dropout: rate must be below 1");
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix<T> mask(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = keep(rng) ? T(1.0 / (1.0 - rate)) : T(0);
  }
  Matrix<T> out = a.value().cwiseProduct(mask);
  return a.tape()->record(std::move(out), {a},
                          [a, mask = std::move(mask)](Tape<T>& t, const Matrix<T>& g) {
                            t.grad_buffer(a.id()) += g.cwiseProduct(mask);
                          });
}

template <typename T>
Var<T> sum_all(Var<T> a) {
  Matrix<T> out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape()->record(std::move(out), {a}, [a](Tape<T>& t, const Matrix<T>& g) {
    t.grad_buffer(a.id()).array() += g(0, 0);
  });
}

template <typename T>
Var<T> mean_all(Var<T> a) {
  return scale(sum_all(a), T(1) / T(a.value().size()));
}

template <typename T>
Var<T> sum_squares(Var<T> a) {
  Matrix<T> out(1, 1);
  out(0, 0) = a.value().squaredNorm();
  return a.tape()->record(std::move(out), {a}, [a](Tape<T>& t, const Matrix<T>& g) {
    t.grad_buffer(a.id()) += a.value() * (T(2) * g(0, 0));
  });
}

template <typename T>
Var<T> softmax_cross_entropy(Var<T> logits, int target) {
  const Matrix<T>& z = logits.value();
  require<T>(z.rows() == 1, "softmax_cross_entropy: expected a single row of logits");
  if (target < 0 || target >= z.cols()) {
    throw InvalidArgument("softmax_cross_entropy: target " + std::to_string(target) +
                          " out of range for " + std::to_string(z.cols()) + " classes");
  }
  const T shift = z.maxCoeff();
  Matrix<T> prob = (z.array() - shift).exp().matrix();
  const T total = prob.sum();
  prob /= total;
  Matrix<T> out(1, 1);
  out(0, 0) = std::log(total) - (z(0, target) - shift);
  return logits.tape()->record(std::move(out), {logits},
                               [logits, target, prob = std::move(prob)](Tape<T>& t,
                                                                        const Matrix<T>& g) {
                                 Matrix<T> d = prob;
                                 d(0, target) -= T(1);
                                 t.grad_buffer(logits.id()) += d * g(0, 0);
                               });
}

template <typename T>
Var<T> margin_loss(Var<T> logits, int target, T kappa) {
  const Matrix<T>& z = logits.value();
  require<T>(z.rows() == 1 && z.cols() >= 2, "margin_loss: expected a row of >= 2 logits");
  if (target < 0 || target >= z.cols()) {
    throw InvalidArgument("margin_loss: target out of range");
  }
  Eigen::Index best = target == 0 ? 1 : 0;
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    if (i != target && z(0, i) > z(0, best)) best = i;
  }
  const T gap = z(0, best) - z(0, target);
  const bool active = gap > -kappa;
  Matrix<T> out(1, 1);
  out(0, 0) = active ? gap : -kappa;
  return logits.tape()->record(std::move(out), {logits},
                               [logits, target, best, active](Tape<T>& t, const Matrix<T>& g) {
                                 if (!active) return;
                                 Matrix<T>& gz = t.grad_buffer(logits.id());
                                 gz(0, best) += g(0, 0);
                                 gz(0, target) -= g(0, 0);
                               });
}

template <typename T>
Var<T> mean_squared_displacement(Var<T> a, Var<T> b) {
  require<T>(a.rows() == b.rows() && a.cols() == b.cols(),
             "mean_squared_displacement: shape mismatch");
  const T n = T(a.rows());
  Matrix<T> out(1, 1);
  out(0, 0) = (a.value() - b.value()).squaredNorm() / n;
  return a.tape()->record(std::move(out), {a, b}, [a, b, n](Tape<T>& t, const Matrix<T>& g) {
    const Matrix<T> d = (a.value() - b.value()) * (T(2) * g(0, 0) / n);
    if (a.requires_grad()) t.grad_buffer(a.id()) += d;
    if (b.requires_grad()) t.grad_buffer(b.id()) -= d;
  });
}

template <typename T>
Var<T> chamfer(Var<T> a, Var<T> b) {
  require<T>(a.rows() > 0 && b.rows() > 0, "chamfer: empty cloud");
  std::vector<int> ab, ba;
  const auto dab = pair_nearest(a.value(), b.value(), ab);
  const auto dba = pair_nearest(b.value(), a.value(), ba);
  double sa = 0.0, sb = 0.0;
  for (double d : dab) sa += d;
  for (double d : dba) sb += d;
  Matrix<T> out(1, 1);
  out(0, 0) = T(0.5 * (sa / double(dab.size()) + sb / double(dba.size())));
  return a.tape()->record(
      std::move(out), {a, b},
      [a, b, ab = std::move(ab), ba = std::move(ba), dab, dba](Tape<T>& t, const Matrix<T>& g) {
        const T wa = T(0.5 / double(dab.size())) * g(0, 0);
        const T wb = T(0.5 / double(dba.size())) * g(0, 0);
        for (std::size_t i = 0; i < ab.size(); ++i) {
          distance_grad(t, a, b, Eigen::Index(i), ab[i], dab[i], wa);
        }
        for (std::size_t j = 0; j < ba.size(); ++j) {
          distance_grad(t, b, a, Eigen::Index(j), ba[j], dba[j], wb);
        }
      });
}

template <typename T>
Var<T> hausdorff(Var<T> a, Var<T> b) {
  require<T>(a.rows() > 0 && b.rows() > 0, "hausdorff: empty cloud");
  std::vector<int> ab, ba;
  const auto dab = pair_nearest(a.value(), b.value(), ab);
  const auto dba = pair_nearest(b.value(), a.value(), ba);
  const auto ia = std::max_element(dab.begin(), dab.end()) - dab.begin();
  const auto ib = std::max_element(dba.begin(), dba.end()) - dba.begin();
  const bool from_a = dab[std::size_t(ia)] >= dba[std::size_t(ib)];
  Matrix<T> out(1, 1);
  out(0, 0) = T(from_a ? dab[std::size_t(ia)] : dba[std::size_t(ib)]);
  const Eigen::Index i = from_a ? ia : ib;
  const Eigen::Index j = from_a ? ab[std::size_t(ia)] : ba[std::size_t(ib)];
  const double d = from_a ? dab[std::size_t(ia)] : dba[std::size_t(ib)];
  return a.tape()->record(std::move(out), {a, b},
                          [a, b, from_a, i, j, d](Tape<T>& t, const Matrix<T>& g) {
                            if (from_a) {
                              distance_grad(t, a, b, i, j, d, g(0, 0));
                            } else {
                              distance_grad(t, b, a, i, j, d, g(0, 0));
                            }
                          });
}

#define PCADV_INSTANTIATE_OPS(T)                                                       \
  template class Tape<T>;                                                              \
  template Var<T> matmul(Var<T>, Var<T>);                                              \
  template Var<T> linear(Var<T>, Var<T>, Var<T>);                                      \
  template Var<T> add(Var<T>, Var<T>);                                                 \
  template Var<T> sub(Var<T>, Var<T>);                                                 \
  template Var<T> scale(Var<T>, T);                                                    \
  template Var<T> add_scalar(Var<T>, T);                                               \
  template Var<T> relu(Var<T>);                                                        \
  template Var<T> tanh(Var<T>);                                                        \
  template Var<T> concat_cols(std::span<const Var<T>>);                                \
  template Var<T> reshape(Var<T>, Eigen::Index, Eigen::Index);                         \
  template Var<T> gather_rows(Var<T>, std::vector<int>);                               \
  template Var<T> group_max(Var<T>, Eigen::Index);                                     \
  template Var<T> group_sum(Var<T>, Eigen::Index);                                     \
  template Var<T> weighted_rows(Var<T>, std::vector<int>, std::vector<double>,         \
                                Eigen::Index);                                         \
  template Var<T> standardize_cols(Var<T>, T);                                         \
  template Var<T> dropout(Var<T>, double, std::mt19937_64&);                           \
  template Var<T> sum_all(Var<T>);                                                     \
  template Var<T> mean_all(Var<T>);                                                    \
  template Var<T> sum_squares(Var<T>);                                                 \
  template Var<T> softmax_cross_entropy(Var<T>, int);                                  \
  template Var<T> margin_loss(Var<T>, int, T);                                         \
  template Var<T> mean_squared_displacement(Var<T>, Var<T>);                           \
  template Var<T> chamfer(Var<T>, Var<T>);                                             \
  template Var<T> hausdorff(Var<T>, Var<T>);

PCADV_INSTANTIATE_OPS(float)
PCADV_INSTANTIATE_OPS(double)

#undef PCADV_INSTANTIATE_OPS

}  // namespace pcadv::nn
