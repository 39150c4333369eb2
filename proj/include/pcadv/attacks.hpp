#pragma once

// Gradient baselines (FGSM, IFGM), the C&W optimization attack and the
// rigid translation attack. All attacks are pure: the input cloud is never
// modified.

#include "pcadv/attack_result.hpp"
#include "pcadv/victim.hpp"

#include <cstdint>
#include <string>

namespace pcadv::attacks {

struct AttackBudget {
  double eps = 0.3;        // unit-cube units
  int steps = 10;
  double step_size = 0.0;  // 0: eps / steps
  double cw_c = 10.0;
  double cw_kappa = 0.0;
  int binary_search_rounds = 5;
  int cw_steps = 200;
  double cw_learning_rate = 0.01;
  /// Stop a C&W round once the objective stalls over a tenth of its steps.
  bool cw_abort_early = true;
  /// IFGM: normalize each point's gradient row instead of the whole cloud.
  bool per_point_normalization = false;

  double effective_step_size() const { return step_size > 0 ? step_size : eps / steps; }
  void validate() const;
};

enum class DistanceMode { l2, chamfer, hausdorff };
std::string to_string(DistanceMode mode);
DistanceMode parse_distance_mode(const std::string& s);

/// One signed gradient step of size eps per coordinate on the
/// cross-entropy towards `target`.
AttackResult fgsm_targeted(victim::VictimModel<float>& victim, const Points<float>& cloud,
                           int target, const AttackBudget& budget);

/// `steps` normalized gradient steps; the accumulated perturbation is
/// projected back onto the l2 ball of radius eps after each one. A zero
/// gradient stops early with status "zero-gradient".
AttackResult ifgm_targeted(victim::VictimModel<float>& victim, const Points<float>& cloud,
                           int target, const AttackBudget& budget);

/// Minimizes d(adv, clean) + c * max(max_{i != t} Z_i - Z_t, -kappa) with
/// Adam over a per-point offset, searching c over binary_search_rounds. In
/// l2 mode d is the sum of squared displacements. Returns the closest
/// successful adversary, or the unmodified cloud with status "failed".
AttackResult cw_attack(victim::VictimModel<float>& victim, const Points<float>& cloud,
                       int target, DistanceMode mode, const AttackBudget& budget);

/// Whole-cloud offset: per axis a magnitude ~ U(0, eps) with a random sign.
Points<float> translation_attack(const Points<float>& cloud, double eps, std::uint64_t seed);

}  // namespace pcadv::attacks
