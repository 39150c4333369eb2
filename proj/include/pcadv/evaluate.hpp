#pragma once

// Attack evaluation: run one attack per test cloud against a seeded target,
// classify the adversary raw and under each defense, and aggregate.

#include "pcadv/attacks.hpp"
#include "pcadv/dataset.hpp"
#include "pcadv/lggan.hpp"
#include "pcadv/victim.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace pcadv::eval {

enum class AttackKind { none, lggan, fgsm, ifgm, cw_l2, cw_chamfer, cw_hausdorff, translation };
std::string to_string(AttackKind kind);
AttackKind parse_attack_kind(const std::string& s);

struct AttackSpec {
  AttackKind kind = AttackKind::none;
  attacks::AttackBudget budget;
  double fgsm_eps = 0.0;         // per-coordinate FGSM step
  double translation_eps = 0.0;  // translation attack only

  /// Row label, e.g. "ifgm" or "translation(0.5)".
  std::string label() const;
};

enum class DefenseKind { none, srs, sor, recenter };

struct DefenseSpec {
  DefenseKind kind = DefenseKind::none;
  double drop_ratio = 0.75;
  int k = 12;
  double alpha = 0.9;

  std::string label() const;
};
DefenseSpec parse_defense(const std::string& name);

/// Applies `spec`; `seed` drives SRS.
Points<float> apply_defense(const DefenseSpec& spec, const Points<float>& cloud,
                            std::uint64_t seed);

struct InstanceRecord {
  std::string attack;
  std::string victim;
  int index = 0;
  int truth = 0;
  int target = 0;
  std::string defense;
  int prediction = 0;
  bool success = false;
  bool correct = false;
  double l2 = 0.0;
  double chamfer = 0.0;
  double kurtosis = 0.0;  // NaN when undefined
  double seconds = 0.0;
  std::string status;
};

struct ReportRow {
  std::string attack;
  std::string victim;
  std::string defense;
  int instances = 0;
  double asr = 0.0;       // % predicted as the target
  double accuracy = 0.0;  // % predicted as the truth
  double other = 0.0;     // % predicted as anything else
  double mean_l2 = 0.0;
  double mean_chamfer = 0.0;
  double mean_kurtosis = 0.0;  // over instances where it is defined
  int kurtosis_defined = 0;
  double mean_seconds = 0.0;
};

struct EvalReport {
  nlohmann::json header = nlohmann::json::object();
  std::vector<ReportRow> rows;
  std::vector<InstanceRecord> instances;

  /// Appends another report's rows and instances.
  void merge(const EvalReport& other);
  const ReportRow& row(const std::string& attack, const std::string& defense) const;
};

struct EvalOptions {
  std::uint64_t seed = 11;
  /// Clouds evaluated (0: all).
  int limit = 0;
};

/// Seeded target per cloud, uniform over the classes other than its label.
std::vector<int> sample_targets(const data::Dataset& clouds, std::uint64_t seed);

/// The undefended row is always produced first. `generator` is required for
/// the lggan attack.
EvalReport evaluate_attack(const AttackSpec& attack, victim::VictimModel<float>& victim,
                           const std::string& victim_name, const data::Dataset& test,
                           const std::vector<DefenseSpec>& defenses, const EvalOptions& options,
                           lggan::Generator<float>* generator = nullptr);

/// Rows recomputed from per-instance records, one per (attack, victim,
/// defense) in order of first appearance.
std::vector<ReportRow> aggregate(const std::vector<InstanceRecord>& records);

}  // namespace pcadv::eval
