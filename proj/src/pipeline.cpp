#include "pcadv/pipeline.hpp"

namespace pcadv::pipeline {

namespace {

config::ExperimentConfig manifest_config(const io::Checkpoint& ckpt, const std::string& kind,
                                         const std::filesystem::path& path) {
  if (ckpt.manifest.value("kind", std::string()) != kind) {
    throw MalformedInput("checkpoint " + path.string() + " is not a " + kind + " checkpoint");
  }
  if (!ckpt.manifest.contains("config")) {
    throw MalformedInput("checkpoint " + path.string() + " has no embedded configuration");
  }
  return config::from_json(ckpt.manifest.at("config"));
}

}  // namespace

void save_victim(const victim::VictimModel<float>& model, const config::ExperimentConfig& cfg,
                 const std::filesystem::path& path) {
  io::Checkpoint ckpt;
  ckpt.manifest = {{"kind", "victim"},
                   {"architecture", victim::to_string(model.config().architecture)},
                   {"seed", cfg.victim.train.seed},
                   {"config", config::to_json(cfg)}};
  io::store_model(model, ckpt);
  io::save_checkpoint(ckpt, path);
}

LoadedVictim load_victim(const std::filesystem::path& path) {
  const io::Checkpoint ckpt = io::load_checkpoint(path);
  LoadedVictim out{manifest_config(ckpt, "victim", path), nullptr};
  out.model = std::make_unique<victim::VictimModel<float>>(out.config.victim.model);
  io::restore_model(ckpt, *out.model);
  return out;
}

void save_lggan(const lggan::TrainedLggan& trained, const config::ExperimentConfig& cfg,
                const std::filesystem::path& path) {
  io::Checkpoint ckpt;
  ckpt.manifest = {{"kind", "lggan"},
                   {"seed", cfg.lggan.seed},
                   {"epochs_completed", trained.log.size()},
                   {"config", config::to_json(cfg)}};
  if (trained.divergence) ckpt.manifest["divergence"] = *trained.divergence;
  io::store_model(trained.generator, ckpt, "generator.");
  io::store_model(trained.discriminator, ckpt, "discriminator.");
  io::save_checkpoint(ckpt, path);
}

LoadedLggan load_lggan(const std::filesystem::path& path) {
  const io::Checkpoint ckpt = io::load_checkpoint(path);
  LoadedLggan out{manifest_config(ckpt, "lggan", path), nullptr, nullptr};
  out.generator = std::make_unique<lggan::Generator<float>>(out.config.generator_config());
  out.discriminator =
      std::make_unique<lggan::Discriminator<float>>(out.config.discriminator_config());
  io::restore_model(ckpt, *out.generator, "generator.");
  io::restore_model(ckpt, *out.discriminator, "discriminator.");
  return out;
}

}  // namespace pcadv::pipeline
