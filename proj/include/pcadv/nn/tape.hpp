#pragma once

// Reverse-mode differentiation over matrix-valued nodes. A Tape records one
// forward evaluation; backward() replays the recorded closures in reverse.
// Only the operator set in ops.hpp is supported.

#include "pcadv/common.hpp"

#include <deque>
#include <functional>
#include <string>
#include <utility>

namespace pcadv::nn {

/// A named trainable array and its accumulated gradient.
template <typename T>
struct Parameter {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)),
        value(Matrix<T>::Zero(rows, cols)),
        grad(Matrix<T>::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Whether a forward pass records gradients for a model's own parameters.
enum class Trainable : bool { no = false, yes = true };

template <typename T>
class Tape;

/// Handle to a node on a Tape.
template <typename T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Matrix<T>& value() const { return tape_->value(id_); }
  /// Gradient of the last backward() output with respect to this node. Zero
  /// sized when the node did not receive any gradient.
  const Matrix<T>& grad() const { return tape_->grad(id_); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  T item() const { return value()(0, 0); }
  bool requires_grad() const { return tape_->requires_grad(id_); }

  Tape<T>* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix<T>&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Matrix<T> value);
  /// Non-owning constant; `value` must outlive the tape.
  Var<T> constant_ref(const Matrix<T>& value);
  /// Differentiable leaf whose gradient is read back through Var::grad().
  Var<T> input(Matrix<T> value);
  /// Leaf bound to `p`; backward() adds into p.grad when trainable.
  Var<T> parameter(Parameter<T>& p, Trainable trainable = Trainable::yes);

  /// Appends an operator node. The closure runs only when some parent
  /// requires a gradient.
  Var<T> record(Matrix<T> value, std::initializer_list<Var<T>> parents,
                Backward backward);
  Var<T> record(Matrix<T> value, bool requires_grad, Backward backward);

  /// Backpropagates from a 1 x 1 node.
  void backward(Var<T> output);

  const Matrix<T>& value(std::size_t id) const;
  const Matrix<T>& grad(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Gradient buffer for accumulation inside backward closures.
  Matrix<T>& grad_buffer(std::size_t id);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix<T> owned;
    const Matrix<T>* ref = nullptr;
    Matrix<T> grad;
    Backward backward;
    Parameter<T>* param = nullptr;
    bool requires_grad = false;
  };
  std::deque<Node> nodes_;
};

}  // namespace pcadv::nn
