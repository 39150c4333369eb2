#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pcadv {

/// Row-major dense matrix; rows are points, columns are channels.
template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// An N x 3 array of coordinates.
template <typename T>
using Points = Matrix<T>;

using MatrixF = Matrix<float>;
using MatrixD = Matrix<double>;

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data (a file, a manifest) could not be parsed.
class MalformedInput : public Error {
 public:
  using Error::Error;
};

/// A metric is mathematically undefined for the given input.
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class Divergence : public Error {
 public:
  using Error::Error;
};

}  // namespace pcadv
