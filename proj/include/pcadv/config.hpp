#pragma once

// Experiment configuration: one JSON document with a flat section per
// module. Missing keys keep their defaults; unknown keys are errors.

#include "pcadv/attacks.hpp"
#include "pcadv/dataset.hpp"
#include "pcadv/lggan.hpp"
#include "pcadv/victim.hpp"

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace pcadv::config {

struct DataSection {
  data::ToyConfig toy;
  std::uint64_t seed = 7;
};

struct VictimSection {
  victim::VictimConfig model;
  victim::TrainConfig train;
};

struct AttackSection {
  attacks::AttackBudget budget;
  /// FGSM step per coordinate. 0 matches the l2 budget of the iterative
  /// attack: eps / sqrt(3N).
  double fgsm_eps = 0.0;
  std::vector<double> translation_eps{0.0, 0.01, 0.1, 0.5, 1.0, 2.0};

  double fgsm_step(int num_points) const;
};

struct DefenseSection {
  double srs_drop_ratio = 0.75;
  int sor_k = 12;
  double sor_alpha = 0.9;
};

struct EvalSection {
  std::uint64_t seed = 11;
  /// Test clouds evaluated per attack (0: all).
  int limit = 0;
  /// Separate cap for the slow optimization attacks (0: same as limit).
  int cw_limit = 40;
  std::vector<double> alpha_sweep{0.1, 1.0, 10.0, 100.0};
  /// Training epochs per sweep point (0: the lggan epoch count).
  int sweep_epochs = 0;
  /// Training clouds per sweep point (0: the lggan train limit).
  int sweep_limit = 0;
};

struct ExperimentConfig {
  DataSection data;
  VictimSection victim;
  lggan::HyperParams lggan;
  bool multi_layer_labels = true;
  bool residual_output = true;
  double max_offset = 0.0;
  /// Training clouds used by train-lggan (0: all).
  int lggan_train_limit = 0;
  bool patch_scores = false;
  AttackSection attack;
  DefenseSection defense;
  EvalSection eval;

  lggan::GeneratorConfig generator_config() const;
  lggan::DiscriminatorConfig discriminator_config() const;
  /// Cross-section consistency (class and point counts).
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig from_json(const nlohmann::json& doc);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

}  // namespace pcadv::config
