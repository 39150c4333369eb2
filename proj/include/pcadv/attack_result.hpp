#pragma once

#include "pcadv/common.hpp"

#include <string>

namespace pcadv {

namespace victim {
template <typename T>
class VictimModel;
}

/// One adversarial example and its measurements; the row type of reports.
struct AttackResult {
  Points<float> adversarial;
  int target = -1;
  int prediction = -1;
  bool success = false;
  double l2 = 0.0;        // mean paired displacement
  double chamfer = 0.0;
  double kurtosis = 0.0;  // NaN when undefined for the adversarial cloud
  double seconds = 0.0;   // wall time of the attack itself
  int victim_queries = 0;
  int generator_passes = 0;
  std::string status = "ok";
};

/// Fills prediction, success flag and distance metrics of `result` from the
/// clean cloud and result.adversarial (one victim forward).
void measure_attack(victim::VictimModel<float>& victim, const Points<float>& clean,
                    AttackResult& result);

}  // namespace pcadv
