#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace pcadv::nn {

/// A scalar function value with its analytic gradient.
struct Evaluation {
  double value = 0.0;
  std::vector<double> gradient;
};

struct GradCheckReport {
  bool passed = false;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;

  std::string summary() const;
};

struct GradCheckOptions {
  double step = 1e-5;
  /// Denominator floor so that coordinates with vanishing gradients are
  /// compared in absolute terms.
  double floor = 1e-6;
};

/// Compares the analytic gradient of `graph` at `point` with central
/// differences. Relative error per coordinate is
/// |a - n| / max(|a|, |n|, floor); passes iff the maximum is below
/// `tolerance`. Failures are reported, not thrown.
GradCheckReport finite_difference_check(
    const std::function<Evaluation(const std::vector<double>&)>& graph,
    std::vector<double> point, double tolerance, GradCheckOptions options = {});

}  // namespace pcadv::nn
