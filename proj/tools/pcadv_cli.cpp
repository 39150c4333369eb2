// Command-line front end: make-data, train-victim, train-lggan, attack,
// evaluate, report.

#include "pcadv/attacks.hpp"
#include "pcadv/config.hpp"
#include "pcadv/dataset.hpp"
#include "pcadv/evaluate.hpp"
#include "pcadv/lggan.hpp"
#include "pcadv/pipeline.hpp"
#include "pcadv/report.hpp"
#include "pcadv/victim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace pcadv;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

config::ExperimentConfig resolve_config(const std::string& path) {
  return path.empty() ? config::ExperimentConfig{} : config::load_config(path);
}

void prepare_output(const fs::path& dir, const config::ExperimentConfig& cfg) {
  fs::create_directories(dir);
  config::save_config(cfg, dir / "config.json");
}

struct Splits {
  data::Dataset train;
  data::Dataset test;
};

Splits load_splits(const fs::path& dir) {
  if (fs::exists(dir / "train.pcad")) {
    return {data::load_dataset(dir / "train.pcad", data::Format::packed),
            data::load_dataset(dir / "test.pcad", data::Format::packed)};
  }
  if (fs::is_directory(dir / "train")) {
    return {data::load_dataset(dir / "train", data::Format::ascii_dir),
            data::load_dataset(dir / "test", data::Format::ascii_dir)};
  }
  throw InvalidArgument("no dataset found in " + dir.string() +
                        " (expected train.pcad or train/)");
}

void write_xyz(const Points<float>& cloud, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write " + path.string());
  char buf[96];
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", double(cloud(i, 0)), double(cloud(i, 1)),
                  double(cloud(i, 2)));
    os << buf;
  }
}

eval::AttackSpec attack_spec(const std::string& name, const config::ExperimentConfig& cfg) {
  eval::AttackSpec spec;
  spec.kind = eval::parse_attack_kind(name);
  spec.budget = cfg.attack.budget;
  spec.fgsm_eps = cfg.attack.fgsm_step(cfg.data.toy.num_points);
  return spec;
}

eval::DefenseSpec defense_spec(const std::string& name, const config::ExperimentConfig& cfg) {
  eval::DefenseSpec spec = eval::parse_defense(name);
  spec.drop_ratio = cfg.defense.srs_drop_ratio;
  spec.k = cfg.defense.sor_k;
  spec.alpha = cfg.defense.sor_alpha;
  return spec;
}

int run_make_data(const std::string& config_path, const fs::path& out,
                  const std::string& format_name, std::optional<std::uint64_t> seed) {
  auto cfg = resolve_config(config_path);
  if (seed) cfg.data.seed = *seed;
  const auto format = data::parse_format(format_name);
  const auto splits = data::make_toy_dataset(cfg.data.toy, cfg.data.seed);
  prepare_output(out, cfg);
  if (format == data::Format::packed) {
    data::save_packed(splits.train, out / "train.pcad");
    data::save_packed(splits.test, out / "test.pcad");
  } else {
    data::save_ascii_dir(splits.train, out / "train");
    data::save_ascii_dir(splits.test, out / "test");
  }
  std::cout << "wrote " << splits.train.size() << " train and " << splits.test.size()
            << " test clouds to " << out.string() << "\n";
  return 0;
}

int run_train_victim(const std::string& config_path, const fs::path& data_dir, const fs::path& out,
                     std::optional<int> epochs, std::optional<std::uint64_t> seed) {
  auto cfg = resolve_config(config_path);
  if (epochs) cfg.victim.train.epochs = *epochs;
  if (seed) cfg.victim.train.seed = *seed;
  const Splits splits = load_splits(data_dir);
  prepare_output(out, cfg);
  std::ofstream log(out / "victim_log.csv");
  log << "epoch,loss,train_accuracy,test_accuracy\n";
  const auto trained = victim::train_victim(
      splits.train, splits.test, cfg.victim.model, cfg.victim.train,
      [&](const victim::EpochRecord& r) {
        log << r.epoch << ',' << r.loss << ',' << r.train_accuracy << ',' << r.test_accuracy
            << '\n';
        std::cout << "epoch " << r.epoch << " loss " << r.loss << " train " << r.train_accuracy
                  << "% test " << r.test_accuracy << "%\n";
      });
  pipeline::save_victim(trained.model, cfg, out / "victim.ckpt");
  std::cout << "test accuracy " << trained.test_accuracy << "%\n";
  return 0;
}

int run_train_lggan(const std::string& config_path, const fs::path& data_dir,
                    const fs::path& victim_path, const fs::path& out, std::optional<double> alpha,
                    std::optional<double> beta, std::optional<int> epochs,
                    std::optional<std::uint64_t> seed, std::optional<double> budget,
                    std::optional<int> limit) {
  auto cfg = resolve_config(config_path);
  if (limit) cfg.lggan_train_limit = *limit;
  if (alpha) cfg.lggan.alpha = *alpha;
  if (beta) cfg.lggan.beta = *beta;
  if (epochs) cfg.lggan.epochs = *epochs;
  if (seed) cfg.lggan.seed = *seed;
  if (budget) cfg.lggan.time_budget_seconds = *budget;
  cfg.validate();
  Splits splits = load_splits(data_dir);
  if (cfg.lggan_train_limit > 0 && splits.train.size() > std::size_t(cfg.lggan_train_limit)) {
    splits.train.clouds.resize(std::size_t(cfg.lggan_train_limit));
  }
  auto victim = pipeline::load_victim(victim_path);
  prepare_output(out, cfg);
  std::ofstream log(out / "lggan_log.jsonl");
  const auto trained = lggan::train_lggan(
      *victim.model, splits.train, splits.test, cfg.generator_config(), cfg.discriminator_config(),
      cfg.lggan, [&](const lggan::EpochLog& e) {
        const nlohmann::json rec = {{"epoch", e.epoch},
                                    {"cls", e.classification},
                                    {"rec", e.reconstruction},
                                    {"dis", e.discriminative},
                                    {"disc", e.discriminator},
                                    {"success_rate", e.success_rate},
                                    {"validation_chamfer", e.validation_chamfer},
                                    {"seconds", e.seconds}};
        log << rec.dump() << '\n';
        std::cout << rec.dump() << std::endl;
      });
  if (trained.divergence) std::cerr << "training stopped: " << *trained.divergence << "\n";
  pipeline::save_lggan(trained, cfg, out / "lggan.ckpt");
  return 0;
}

struct Models {
  pipeline::LoadedVictim victim;
  std::optional<pipeline::LoadedLggan> gan;
};

Models load_models(const fs::path& victim_path, const std::string& generator_path) {
  Models m{pipeline::load_victim(victim_path), std::nullopt};
  if (!generator_path.empty()) m.gan = pipeline::load_lggan(generator_path);
  return m;
}

int run_attack(const std::string& config_path, const fs::path& data_dir,
               const fs::path& victim_path, const std::string& generator_path,
               const std::string& attack_name, int index, std::optional<int> target,
               const std::string& out, std::optional<std::uint64_t> seed) {
  auto cfg = resolve_config(config_path);
  if (seed) cfg.eval.seed = *seed;
  const Splits splits = load_splits(data_dir);
  if (index < 0 || std::size_t(index) >= splits.test.size()) {
    throw InvalidArgument("--index out of range");
  }
  Models models = load_models(victim_path, generator_path);
  auto& victim = *models.victim.model;
  const auto& sample = splits.test.clouds[std::size_t(index)];
  const int t = target ? *target : eval::sample_targets(splits.test, cfg.eval.seed)[std::size_t(index)];
  const eval::AttackSpec spec = attack_spec(attack_name, cfg);

  AttackResult r;
  switch (spec.kind) {
    case eval::AttackKind::lggan:
      if (!models.gan) throw InvalidArgument("the lggan attack needs --generator");
      r = lggan::attack_lggan(*models.gan->generator, victim, sample.points, t);
      break;
    case eval::AttackKind::fgsm: {
      auto b = spec.budget;
      b.eps = spec.fgsm_eps;
      r = attacks::fgsm_targeted(victim, sample.points, t, b);
      break;
    }
    case eval::AttackKind::ifgm:
      r = attacks::ifgm_targeted(victim, sample.points, t, spec.budget);
      break;
    case eval::AttackKind::cw_l2:
      r = attacks::cw_attack(victim, sample.points, t, attacks::DistanceMode::l2, spec.budget);
      break;
    case eval::AttackKind::cw_chamfer:
      r = attacks::cw_attack(victim, sample.points, t, attacks::DistanceMode::chamfer, spec.budget);
      break;
    case eval::AttackKind::cw_hausdorff:
      r = attacks::cw_attack(victim, sample.points, t, attacks::DistanceMode::hausdorff,
                             spec.budget);
      break;
    default:
      throw InvalidArgument("attack supports lggan, fgsm, ifgm and the cw variants");
  }
  if (!out.empty()) write_xyz(r.adversarial, out);
  const nlohmann::json summary = {{"index", index},
                                  {"truth", sample.label},
                                  {"target", r.target},
                                  {"prediction", r.prediction},
                                  {"success", r.success},
                                  {"l2", r.l2},
                                  {"chamfer", r.chamfer},
                                  {"kurtosis", std::isfinite(r.kurtosis) ? nlohmann::json(r.kurtosis)
                                                                         : nlohmann::json(nullptr)},
                                  {"seconds", r.seconds},
                                  {"victim_queries", r.victim_queries},
                                  {"status", r.status}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int run_evaluate(const std::string& config_path, const fs::path& data_dir,
                 const fs::path& victim_path, const std::string& generator_path,
                 const std::string& attack_list, const std::string& defense_list,
                 const fs::path& out, const std::string& stem, std::optional<std::uint64_t> seed,
                 std::optional<int> limit) {
  auto cfg = resolve_config(config_path);
  if (seed) cfg.eval.seed = *seed;
  if (limit) cfg.eval.limit = *limit;
  const Splits splits = load_splits(data_dir);
  Models models = load_models(victim_path, generator_path);
  std::vector<eval::DefenseSpec> defenses;
  for (const auto& d : split_list(defense_list)) defenses.push_back(defense_spec(d, cfg));
  const std::string victim_name =
      victim::to_string(models.victim.config.victim.model.architecture);
  prepare_output(out, cfg);

  eval::EvalReport report;
  for (const auto& name : split_list(attack_list)) {
    eval::AttackSpec spec = attack_spec(name, cfg);
    eval::EvalOptions options{cfg.eval.seed, cfg.eval.limit};
    const bool slow = spec.kind == eval::AttackKind::cw_l2 ||
                      spec.kind == eval::AttackKind::cw_chamfer ||
                      spec.kind == eval::AttackKind::cw_hausdorff;
    if (slow && cfg.eval.cw_limit > 0) options.limit = cfg.eval.cw_limit;
    lggan::Generator<float>* generator = models.gan ? models.gan->generator.get() : nullptr;
    if (spec.kind == eval::AttackKind::translation) {
      for (double eps : cfg.attack.translation_eps) {
        spec.translation_eps = eps;
        report.merge(eval::evaluate_attack(spec, *models.victim.model, victim_name, splits.test,
                                           defenses, options, generator));
      }
    } else {
      report.merge(eval::evaluate_attack(spec, *models.victim.model, victim_name, splits.test,
                                         defenses, options, generator));
    }
  }
  report.header = {{"seed", cfg.eval.seed},
                   {"limit", cfg.eval.limit},
                   {"cw_limit", cfg.eval.cw_limit},
                   {"data_seed", cfg.data.seed},
                   {"victim_seed", models.victim.config.victim.train.seed}};
  if (models.gan) {
    report.header["alpha"] = models.gan->config.lggan.alpha;
    report.header["beta"] = models.gan->config.lggan.beta;
    report.header["lggan_seed"] = models.gan->config.lggan.seed;
  }
  report::emit_report(report, {report::Format::csv, report::Format::json}, out, stem);
  for (const auto& r : report.rows) {
    std::printf("%-18s %-10s asr %6.2f%% acc %6.2f%% l2 %.4f chamfer %.4f kurt %.2f t %.4fs\n",
                r.attack.c_str(), r.defense.c_str(), r.asr, r.accuracy, r.mean_l2,
                r.mean_chamfer, r.mean_kurtosis, r.mean_seconds);
  }
  return 0;
}

int run_report(const std::vector<std::string>& inputs, const fs::path& out,
               const std::string& stem, const std::string& formats_text) {
  if (inputs.empty()) throw InvalidArgument("report needs at least one --input");
  eval::EvalReport merged;
  nlohmann::json sources = nlohmann::json::array();
  // alpha -> (sum asr, sum l2, sum chamfer, count)
  std::map<double, report::SweepPoint> sweep;
  for (const auto& path : inputs) {
    const eval::EvalReport r = report::read_json(path);
    sources.push_back(r.header);
    merged.merge(r);
    if (r.header.contains("alpha")) {
      const double alpha = r.header.at("alpha").get<double>();
      for (const auto& row : r.rows) {
        if (row.attack != "lggan" || row.defense != "none") continue;
        auto [it, fresh] = sweep.try_emplace(alpha, report::SweepPoint{alpha, 0, 0, 0, 0});
        it->second.asr += row.asr;
        it->second.mean_l2 += row.mean_l2;
        it->second.mean_chamfer += row.mean_chamfer;
        ++it->second.seeds;
      }
    }
  }
  merged.header = {{"sources", sources}};
  std::vector<report::Format> formats;
  for (const auto& f : split_list(formats_text)) formats.push_back(report::parse_format(f));
  std::vector<report::SweepPoint> points;
  if (sweep.size() > 1) {
    for (auto& [alpha, p] : sweep) {
      p.asr /= p.seeds;
      p.mean_l2 /= p.seeds;
      p.mean_chamfer /= p.seeds;
      points.push_back(p);
    }
  }
  fs::create_directories(out);
  for (const auto& path : report::emit_report(merged, formats, out, stem, points)) {
    std::cout << "wrote " << path.string() << "\n";
  }
  if (!points.empty()) {
    std::ofstream os(out / (stem + "_sweep.json"));
    os << report::sweep_to_json(points).dump(2) << '\n';
    std::cout << "wrote " << (out / (stem + "_sweep.json")).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial point cloud toolkit"};
  app.require_subcommand(1);

  std::string config_path, data_dir, victim_path, generator_path, out, format = "packed";
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs, limit, target;
  std::optional<double> alpha, beta, budget;

  auto* make_data = app.add_subcommand("make-data", "Generate the procedural toy benchmark");
  make_data->add_option("--config", config_path, "Experiment config (JSON)");
  make_data->add_option("--out", out, "Output directory")->required();
  make_data->add_option("--format", format, "packed | ascii-dir");
  make_data->add_option("--seed", seed, "Dataset seed");

  auto* train_victim = app.add_subcommand("train-victim", "Train a victim classifier");
  train_victim->add_option("--config", config_path, "Experiment config (JSON)");
  train_victim->add_option("--data", data_dir, "Dataset directory")->required();
  train_victim->add_option("--out", out, "Output directory")->required();
  train_victim->add_option("--epochs", epochs, "Training epochs");
  train_victim->add_option("--seed", seed, "Training seed");

  auto* train_gan = app.add_subcommand("train-lggan", "Train the label-guided generator");
  train_gan->add_option("--config", config_path, "Experiment config (JSON)");
  train_gan->add_option("--data", data_dir, "Dataset directory")->required();
  train_gan->add_option("--victim", victim_path, "Victim checkpoint")->required();
  train_gan->add_option("--out", out, "Output directory")->required();
  train_gan->add_option("--alpha", alpha, "Classification weight");
  train_gan->add_option("--beta", beta, "Adversarial (GAN) weight");
  train_gan->add_option("--epochs", epochs, "Training epochs");
  train_gan->add_option("--seed", seed, "Training seed");
  train_gan->add_option("--time-budget", budget, "Stop after this many seconds");
  train_gan->add_option("--limit", limit, "Train on the first this many clouds");

  std::string attack_name = "lggan";
  int index = 0;
  auto* attack = app.add_subcommand("attack", "Attack one test cloud");
  attack->add_option("--config", config_path, "Experiment config (JSON)");
  attack->add_option("--data", data_dir, "Dataset directory")->required();
  attack->add_option("--victim", victim_path, "Victim checkpoint")->required();
  attack->add_option("--generator", generator_path, "LG-GAN checkpoint");
  attack->add_option("--attack", attack_name, "lggan | fgsm | ifgm | cw-l2 | cw-chamfer | cw-hausdorff");
  attack->add_option("--index", index, "Test cloud index");
  attack->add_option("--target", target, "Target class (default: seeded draw)");
  attack->add_option("--out", out, "Write the adversarial cloud as x y z lines");
  attack->add_option("--seed", seed, "Evaluation seed for the target draw");

  std::string attacks = "lggan,fgsm,ifgm,cw-l2", defenses = "srs,sor", stem = "report";
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate attacks under defenses");
  evaluate->add_option("--config", config_path, "Experiment config (JSON)");
  evaluate->add_option("--data", data_dir, "Dataset directory")->required();
  evaluate->add_option("--victim", victim_path, "Victim checkpoint")->required();
  evaluate->add_option("--generator", generator_path, "LG-GAN checkpoint");
  evaluate->add_option("--attacks", attacks, "Comma-separated attack list");
  evaluate->add_option("--defenses", defenses, "Comma-separated defense list");
  evaluate->add_option("--out", out, "Output directory")->required();
  evaluate->add_option("--stem", stem, "Report file stem");
  evaluate->add_option("--seed", seed, "Evaluation seed");
  evaluate->add_option("--limit", limit, "Evaluate at most this many clouds");

  std::vector<std::string> inputs;
  std::string formats = "csv,json";
  auto* report_cmd = app.add_subcommand("report", "Merge evaluation reports and plot alpha sweeps");
  report_cmd->add_option("--input", inputs, "Evaluation report JSON (repeatable)")->required();
  report_cmd->add_option("--out", out, "Output directory")->required();
  report_cmd->add_option("--stem", stem, "Output file stem");
  report_cmd->add_option("--format", formats, "csv,json");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*make_data) return run_make_data(config_path, out, format, seed);
    if (*train_victim) return run_train_victim(config_path, data_dir, out, epochs, seed);
    if (*train_gan) {
      return run_train_lggan(config_path, data_dir, victim_path, out, alpha, beta, epochs, seed,
                             budget, limit);
    }
    if (*attack) {
      return run_attack(config_path, data_dir, victim_path, generator_path, attack_name, index,
                        target, out, seed);
    }
    if (*evaluate) {
      return run_evaluate(config_path, data_dir, victim_path, generator_path, attacks, defenses,
                          out, stem, seed, limit);
    }
    if (*report_cmd) return run_report(inputs, out, stem, formats);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
