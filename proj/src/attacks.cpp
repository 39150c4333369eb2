#include "pcadv/attacks.hpp"

#include "pcadv/geometry.hpp"
#include "pcadv/nn/adam.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace pcadv {

void measure_attack(victim::VictimModel<float>& victim, const Points<float>& clean,
                    AttackResult& result) {
  result.prediction = victim.predict(result.adversarial);
  result.success = result.prediction == result.target;
  ++result.victim_queries;
  result.l2 = result.adversarial.rows() == clean.rows()
                  ? geometry::paired_l2_distance(result.adversarial, clean)
                  : std::numeric_limits<double>::quiet_NaN();
  result.chamfer = geometry::chamfer_distance(result.adversarial, clean);
  try {
    result.kurtosis = geometry::kurtosis_metric(result.adversarial);
  } catch (const UndefinedMetric&) {
    result.kurtosis = std::numeric_limits<double>::quiet_NaN();
  }
}

namespace attacks {

using nn::Tape;
using nn::Trainable;
using nn::Var;
using Clock = std::chrono::steady_clock;

void AttackBudget::validate() const {
  if (!(eps >= 0) || steps < 1 || !(step_size >= 0) || !(cw_c >= 0) || !(cw_kappa >= 0) ||
      binary_search_rounds < 1 || cw_steps < 1 || !(cw_learning_rate > 0)) {
    throw InvalidArgument(
        "attack budget: values must be non-negative, step counts and rounds at least 1");
  }
}

std::string to_string(DistanceMode mode) {
  switch (mode) {
    case DistanceMode::l2: return "l2";
    case DistanceMode::chamfer: return "chamfer";
    case DistanceMode::hausdorff: return "hausdorff";
  }
  return "?";
}

DistanceMode parse_distance_mode(const std::string& s) {
  if (s == "l2") return DistanceMode::l2;
  if (s == "chamfer") return DistanceMode::chamfer;
  if (s == "hausdorff") return DistanceMode::hausdorff;
  throw InvalidArgument("unknown distance mode '" + s + "' (l2|chamfer|hausdorff)");
}

namespace {

void check_target(victim::VictimModel<float>& victim, int target) {
  if (target < 0 || target >= victim.num_classes()) {
    throw InvalidArgument("attack: target " + std::to_string(target) + " out of range");
  }
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

AttackResult fgsm_targeted(victim::VictimModel<float>& victim, const Points<float>& cloud,
                           int target, const AttackBudget& budget) {
  budget.validate();
  check_target(victim, target);
  const auto start = Clock::now();
  AttackResult result;
  result.target = target;
  const auto g = victim::input_gradient(victim, cloud, target);
  const float eps = float(budget.eps);
  result.adversarial = cloud;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const double d = g.gradient.data()[i];
    if (d > 0) result.adversarial.data()[i] -= eps;
    if (d < 0) result.adversarial.data()[i] += eps;
  }
  result.victim_queries = 1;
  result.seconds = seconds_since(start);
  measure_attack(victim, cloud, result);
  return result;
}

AttackResult ifgm_targeted(victim::VictimModel<float>& victim, const Points<float>& cloud,
                           int target, const AttackBudget& budget) {
  budget.validate();
  check_target(victim, target);
  const auto start = Clock::now();
  AttackResult result;
  result.target = target;
  const double step = budget.effective_step_size();
  Points<double> delta = Points<double>::Zero(cloud.rows(), 3);
  Points<float> current = cloud;
  for (int s = 0; s < budget.steps; ++s) {
    Points<double> g = victim::input_gradient(victim, current, target).gradient;
    ++result.victim_queries;
    if (budget.per_point_normalization) {
      bool any = false;
      for (Eigen::Index i = 0; i < g.rows(); ++i) {
        const double n = g.row(i).norm();
        if (n > 0) {
          g.row(i) /= n;
          any = true;
        }
      }
      if (!any) {
        result.status = "zero-gradient";
        break;
      }
    } else {
      const double n = g.norm();
      if (!(n > 0)) {
        result.status = "zero-gradient";
        break;
      }
      g /= n;
    }
    delta -= step * g;
    const double norm = delta.norm();
    if (norm > budget.eps) delta *= budget.eps / norm;
    current = cloud + delta.cast<float>();
  }
  // Rounding to float may push the offset marginally past the ball.
  for (int guard = 0; guard < 64; ++guard) {
    const double norm = (current.cast<double>() - cloud.cast<double>()).norm();
    if (norm <= budget.eps) break;
    delta *= budget.eps / norm * (1.0 - 1e-6);
    current = cloud + delta.cast<float>();
  }
  result.adversarial = current;
  result.seconds = seconds_since(start);
  measure_attack(victim, cloud, result);
  return result;
}

AttackResult cw_attack(victim::VictimModel<float>& victim, const Points<float>& cloud,
                       int target, DistanceMode mode, const AttackBudget& budget) {
  budget.validate();
  check_target(victim, target);
  const auto start = Clock::now();
  AttackResult result;
  result.target = target;
  const float kappa = float(budget.cw_kappa);

  double best_distance = std::numeric_limits<double>::infinity();
  Points<float> best;
  double c = budget.cw_c;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();

  for (int round = 0; round < budget.binary_search_rounds; ++round) {
    nn::Parameter<float> offset("offset", cloud.rows(), 3);
    nn::AdamState<float> adam;
    adam.config.learning_rate = budget.cw_learning_rate;
    bool round_success = false;
    double checkpoint = std::numeric_limits<double>::infinity();
    const int window = std::max(1, budget.cw_steps / 10);

    for (int s = 0; s < budget.cw_steps; ++s) {
      Tape<float> tape;
      Var<float> adv = nn::add(tape.constant_ref(cloud), tape.parameter(offset));
      Var<float> logits = victim.forward(tape, adv, Trainable::no);
      ++result.victim_queries;
      Var<float> margin = nn::margin_loss(logits, target, kappa);
      Var<float> distance;
      switch (mode) {
        case DistanceMode::l2:
          distance = nn::sum_squares(nn::sub(adv, tape.constant_ref(cloud)));
          break;
        case DistanceMode::chamfer:
          distance = nn::chamfer(adv, tape.constant_ref(cloud));
          break;
        case DistanceMode::hausdorff:
          distance = nn::hausdorff(adv, tape.constant_ref(cloud));
          break;
      }
      Eigen::Index pred = 0;
      logits.value().row(0).maxCoeff(&pred);
      if (int(pred) == target && margin.item() <= -kappa) {
        round_success = true;
        if (double(distance.item()) < best_distance) {
          best_distance = double(distance.item());
          best = adv.value();
        }
      }
      Var<float> loss = nn::add(distance, nn::scale(margin, float(c)));
      const double value = double(loss.item());
      if (!std::isfinite(value)) break;
      if (budget.cw_abort_early && s % window == 0) {
        if (value > checkpoint * 0.9999) break;
        checkpoint = value;
      }
      offset.zero_grad();
      tape.backward(loss);
      try {
        nn::adam_update(offset, adam);
      } catch (const Divergence&) {
        break;
      }
    }

    if (round_success) {
      upper = std::min(upper, c);
      c = 0.5 * (lower + upper);
    } else {
      lower = std::max(lower, c);
      c = std::isfinite(upper) ? 0.5 * (lower + upper) : c * 2.0;
    }
  }

  if (std::isfinite(best_distance)) {
    result.adversarial = best;
  } else {
    result.adversarial = cloud;
    result.status = "failed";
  }
  result.seconds = seconds_since(start);
  measure_attack(victim, cloud, result);
  return result;
}

Points<float> translation_attack(const Points<float>& cloud, double eps, std::uint64_t seed) {
  if (!(eps >= 0)) throw InvalidArgument("translation_attack: eps must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> magnitude(0.0, 1.0);
  std::bernoulli_distribution negative(0.5);
  Eigen::RowVector3f offset;
  for (int axis = 0; axis < 3; ++axis) {
    const double m = eps * magnitude(rng);
    offset(axis) = float(negative(rng) ? -m : m);
  }
  Points<float> out = cloud;
  out.rowwise() += offset;
  return out;
}

}  // namespace attacks
}  // namespace pcadv
