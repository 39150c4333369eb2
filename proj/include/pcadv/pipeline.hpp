#pragma once

// Model persistence on top of checkpoints: each file embeds the resolved
// experiment configuration so it can rebuild its own architecture.

#include "pcadv/checkpoint.hpp"
#include "pcadv/config.hpp"
#include "pcadv/lggan.hpp"
#include "pcadv/victim.hpp"

#include <filesystem>
#include <memory>

namespace pcadv::pipeline {

void save_victim(const victim::VictimModel<float>& model, const config::ExperimentConfig& cfg,
                 const std::filesystem::path& path);

struct LoadedVictim {
  config::ExperimentConfig config;
  std::unique_ptr<victim::VictimModel<float>> model;
};
LoadedVictim load_victim(const std::filesystem::path& path);

void save_lggan(const lggan::TrainedLggan& trained, const config::ExperimentConfig& cfg,
                const std::filesystem::path& path);

struct LoadedLggan {
  config::ExperimentConfig config;
  std::unique_ptr<lggan::Generator<float>> generator;
  std::unique_ptr<lggan::Discriminator<float>> discriminator;
};
LoadedLggan load_lggan(const std::filesystem::path& path);

}  // namespace pcadv::pipeline
