#include "pcadv/evaluate.hpp"

#include "pcadv/defenses.hpp"
#include "pcadv/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>

namespace pcadv::eval {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt, std::uint64_t index) {
  std::uint64_t z = seed ^ (salt * 0x9e3779b97f4a7c15ull) ^ (index + 0x632be59bd9b4e019ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::none: return "none";
    case AttackKind::lggan: return "lggan";
    case AttackKind::fgsm: return "fgsm";
    case AttackKind::ifgm: return "ifgm";
    case AttackKind::cw_l2: return "cw-l2";
    case AttackKind::cw_chamfer: return "cw-chamfer";
    case AttackKind::cw_hausdorff: return "cw-hausdorff";
    case AttackKind::translation: return "translation";
  }
  return "?";
}

AttackKind parse_attack_kind(const std::string& s) {
  for (AttackKind k : {AttackKind::none, AttackKind::lggan, AttackKind::fgsm, AttackKind::ifgm,
                       AttackKind::cw_l2, AttackKind::cw_chamfer, AttackKind::cw_hausdorff,
                       AttackKind::translation}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown attack '" + s +
                        "' (none|lggan|fgsm|ifgm|cw-l2|cw-chamfer|cw-hausdorff|translation)");
}

std::string AttackSpec::label() const {
  if (kind == AttackKind::translation) return "translation(" + format_number(translation_eps) + ")";
  return to_string(kind);
}

std::string DefenseSpec::label() const {
  switch (kind) {
    case DefenseKind::none: return "none";
    case DefenseKind::srs: return "srs";
    case DefenseKind::sor: return "sor";
    case DefenseKind::recenter: return "recenter";
  }
  return "?";
}

DefenseSpec parse_defense(const std::string& name) {
  DefenseSpec spec;
  if (name == "none") spec.kind = DefenseKind::none;
  else if (name == "srs") spec.kind = DefenseKind::srs;
  else if (name == "sor") spec.kind = DefenseKind::sor;
  else if (name == "recenter") spec.kind = DefenseKind::recenter;
  else throw InvalidArgument("unknown defense '" + name + "' (none|srs|sor|recenter)");
  return spec;
}

Points<float> apply_defense(const DefenseSpec& spec, const Points<float>& cloud,
                            std::uint64_t seed) {
  switch (spec.kind) {
    case DefenseKind::none: return cloud;
    case DefenseKind::srs: return defenses::srs_defense(cloud, spec.drop_ratio, seed);
    case DefenseKind::sor: return defenses::sor_defense(cloud, spec.k, spec.alpha);
    case DefenseKind::recenter: return defenses::recenter_defense(cloud);
  }
  return cloud;
}

void EvalReport::merge(const EvalReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  instances.insert(instances.end(), other.instances.begin(), other.instances.end());
}

const ReportRow& EvalReport::row(const std::string& attack, const std::string& defense) const {
  for (const auto& r : rows) {
    if (r.attack == attack && r.defense == defense) return r;
  }
  throw InvalidArgument("report has no row for attack " + attack + " under defense " + defense);
}

std::vector<int> sample_targets(const data::Dataset& clouds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> targets;
  targets.reserve(clouds.clouds.size());
  for (const auto& c : clouds.clouds) {
    targets.push_back(lggan::sample_target(c.label, clouds.num_classes(), rng));
  }
  return targets;
}

EvalReport evaluate_attack(const AttackSpec& attack, victim::VictimModel<float>& victim,
                           const std::string& victim_name, const data::Dataset& test,
                           const std::vector<DefenseSpec>& defense_list,
                           const EvalOptions& options, lggan::Generator<float>* generator) {
  if (attack.kind == AttackKind::lggan && !generator) {
    throw InvalidArgument("evaluate_attack: the lggan attack needs a trained generator");
  }
  if (test.clouds.empty()) throw InvalidArgument("evaluate_attack: empty dataset");
  std::vector<DefenseSpec> defenses{DefenseSpec{}};
  for (const auto& d : defense_list) {
    if (d.kind != DefenseKind::none) defenses.push_back(d);
  }
  const std::vector<int> targets = sample_targets(test, options.seed);
  std::size_t count = test.clouds.size();
  if (options.limit > 0) count = std::min(count, std::size_t(options.limit));

  attacks::AttackBudget fgsm_budget = attack.budget;
  fgsm_budget.eps = attack.fgsm_eps;

  EvalReport report;
  const std::string label = attack.label();
  for (std::size_t i = 0; i < count; ++i) {
    const auto& sample = test.clouds[i];
    const int target = targets[i];
    AttackResult result;
    switch (attack.kind) {
      case AttackKind::none:
        result.target = target;
        result.adversarial = sample.points;
        measure_attack(victim, sample.points, result);
        break;
      case AttackKind::lggan:
        result = lggan::attack_lggan(*generator, victim, sample.points, target);
        break;
      case AttackKind::fgsm:
        result = attacks::fgsm_targeted(victim, sample.points, target, fgsm_budget);
        break;
      case AttackKind::ifgm:
        result = attacks::ifgm_targeted(victim, sample.points, target, attack.budget);
        break;
      case AttackKind::cw_l2:
      case AttackKind::cw_chamfer:
      case AttackKind::cw_hausdorff: {
        const auto mode = attack.kind == AttackKind::cw_l2        ? attacks::DistanceMode::l2
                          : attack.kind == AttackKind::cw_chamfer ? attacks::DistanceMode::chamfer
                                                                  : attacks::DistanceMode::hausdorff;
        result = attacks::cw_attack(victim, sample.points, target, mode, attack.budget);
        break;
      }
      case AttackKind::translation:
        result.target = target;
        result.adversarial = attacks::translation_attack(sample.points, attack.translation_eps,
                                                         mix(options.seed, 2, i));
        measure_attack(victim, sample.points, result);
        break;
    }
    for (const auto& d : defenses) {
      InstanceRecord rec;
      rec.attack = label;
      rec.victim = victim_name;
      rec.index = int(i);
      rec.truth = sample.label;
      rec.target = target;
      rec.defense = d.label();
      rec.prediction = d.kind == DefenseKind::none
                           ? result.prediction
                           : victim.predict(apply_defense(d, result.adversarial, mix(options.seed, 1, i)));
      rec.success = rec.prediction == target;
      rec.correct = rec.prediction == sample.label;
      rec.l2 = result.l2;
      rec.chamfer = result.chamfer;
      rec.kurtosis = result.kurtosis;
      rec.seconds = result.seconds;
      rec.status = result.status;
      report.instances.push_back(std::move(rec));
    }
  }
  report.rows = aggregate(report.instances);
  report.header = {{"seed", options.seed}, {"limit", options.limit}, {"attack", label},
                   {"victim", victim_name}};
  return report;
}

std::vector<ReportRow> aggregate(const std::vector<InstanceRecord>& records) {
  std::vector<ReportRow> rows;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> slot;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.attack, r.victim, r.defense);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, rows.size()).first;
      ReportRow row;
      row.attack = r.attack;
      row.victim = r.victim;
      row.defense = r.defense;
      rows.push_back(row);
    }
    ReportRow& row = rows[it->second];
    ++row.instances;
    row.asr += r.success;
    row.accuracy += r.correct;
    row.other += !r.success && !r.correct;
    row.mean_l2 += r.l2;
    row.mean_chamfer += r.chamfer;
    if (std::isfinite(r.kurtosis)) {
      row.mean_kurtosis += r.kurtosis;
      ++row.kurtosis_defined;
    }
    row.mean_seconds += r.seconds;
  }
  for (auto& row : rows) {
    const double n = double(row.instances);
    row.asr *= 100.0 / n;
    row.accuracy *= 100.0 / n;
    row.other *= 100.0 / n;
    row.mean_l2 /= n;
    row.mean_chamfer /= n;
    row.mean_kurtosis = row.kurtosis_defined
                            ? row.mean_kurtosis / double(row.kurtosis_defined)
                            : std::numeric_limits<double>::quiet_NaN();
    row.mean_seconds /= n;
  }
  return rows;
}

}  // namespace pcadv::eval
