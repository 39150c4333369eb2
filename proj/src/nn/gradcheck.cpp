#include "pcadv/nn/gradcheck.hpp"

#include "pcadv/common.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pcadv::nn {

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << (passed ? "pass" : "FAIL") << ": max relative error " << max_relative_error
     << " over " << coordinates << " coordinates (worst #" << worst_index
     << ": analytic " << worst_analytic << ", numeric " << worst_numeric << ")";
  return os.str();
}

GradCheckReport finite_difference_check(
    const std::function<Evaluation(const std::vector<double>&)>& graph,
    std::vector<double> point, double tolerance, GradCheckOptions options) {
  const Evaluation at = graph(point);
  if (at.gradient.size() != point.size()) {
    throw InvalidArgument("finite_difference_check: gradient size differs from input size");
  }
  GradCheckReport report;
  report.coordinates = point.size();
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + options.step;
    const double up = graph(point).value;
    point[i] = saved - options.step;
    const double down = graph(point).value;
    point[i] = saved;
    const double numeric = (up - down) / (2.0 * options.step);
    const double analytic = at.gradient[i];
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), options.floor});
    const double err = std::abs(analytic - numeric) / denom;
    const double e = std::isnan(err) ? INFINITY : err;
    if (i == 0 || e > report.max_relative_error) {
      report.max_relative_error = e;
      report.worst_index = i;
      report.worst_analytic = analytic;
      report.worst_numeric = numeric;
    }
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace pcadv::nn
