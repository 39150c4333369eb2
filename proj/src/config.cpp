#include "pcadv/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace pcadv::config {

using nlohmann::json;

double AttackSection::fgsm_step(int num_points) const {
  return fgsm_eps > 0 ? fgsm_eps : budget.eps / std::sqrt(3.0 * double(num_points));
}

lggan::GeneratorConfig ExperimentConfig::generator_config() const {
  lggan::GeneratorConfig g;
  g.num_classes = lggan.num_classes;
  if (lggan.levels < 1 || lggan.levels > int(g.levels.size())) {
    throw InvalidArgument("lggan.levels must lie in [1, " + std::to_string(g.levels.size()) + "]");
  }
  if (lggan.decoder_layers < 2 || lggan.decoder_layers > int(g.decoder_widths.size()) + 1) {
    throw InvalidArgument("lggan.decoder_layers must lie in [2, " +
                          std::to_string(g.decoder_widths.size() + 1) + "]");
  }
  g.levels.resize(std::size_t(lggan.levels));
  g.decoder_widths.resize(std::size_t(lggan.decoder_layers - 1));
  g.multi_layer_labels = multi_layer_labels;
  g.residual_output = residual_output;
  g.max_offset = max_offset;
  return g;
}

lggan::DiscriminatorConfig ExperimentConfig::discriminator_config() const {
  lggan::DiscriminatorConfig d;
  d.k = lggan.k;
  d.patch_scores = patch_scores;
  return d;
}

void ExperimentConfig::validate() const {
  if (victim.model.num_classes != data.toy.num_classes ||
      lggan.num_classes != data.toy.num_classes) {
    throw InvalidArgument("config: data, victim and lggan class counts differ");
  }
  if (victim.model.num_points != data.toy.num_points) {
    throw InvalidArgument("config: data and victim point counts differ");
  }
  lggan.validate();
  if (!(max_offset >= 0)) throw InvalidArgument("config: lggan.max_offset must be non-negative");
  attack.budget.validate();
  if (!(defense.srs_drop_ratio >= 0 && defense.srs_drop_ratio < 1) || defense.sor_k < 1) {
    throw InvalidArgument("config: defense parameters out of range");
  }
  if (eval.limit < 0 || eval.cw_limit < 0 || eval.sweep_epochs < 0 || eval.sweep_limit < 0) {
    throw InvalidArgument("config: eval limits must be non-negative");
  }
}

json to_json(const ExperimentConfig& c) {
  json doc;
  doc["data"] = {{"num_classes", c.data.toy.num_classes},
                 {"num_points", c.data.toy.num_points},
                 {"train_per_class", c.data.toy.train_per_class},
                 {"test_per_class", c.data.toy.test_per_class},
                 {"jitter_sigma", c.data.toy.jitter_sigma},
                 {"jitter_clip", c.data.toy.jitter_clip},
                 {"seed", c.data.seed}};
  doc["victim"] = {{"architecture", victim::to_string(c.victim.model.architecture)},
                   {"use_tnet", c.victim.model.use_tnet},
                   {"normalize", c.victim.model.normalize},
                   {"dropout", c.victim.model.dropout},
                   {"point_widths", c.victim.model.point_widths},
                   {"head_widths", c.victim.model.head_widths},
                   {"global_widths", c.victim.model.global_widths},
                   {"pp_head_widths", c.victim.model.pp_head_widths},
                   {"epochs", c.victim.train.epochs},
                   {"batch_size", c.victim.train.batch_size},
                   {"learning_rate", c.victim.train.learning_rate},
                   {"shift_augment", c.victim.train.shift_augment},
                   {"seed", c.victim.train.seed}};
  const auto& h = c.lggan;
  doc["lggan"] = {{"alpha", h.alpha},
                  {"beta", h.beta},
                  {"lr_generator", h.lr_generator},
                  {"lr_discriminator", h.lr_discriminator},
                  {"batch_size", h.batch_size},
                  {"epochs", h.epochs},
                  {"k", h.k},
                  {"levels", h.levels},
                  {"decoder_layers", h.decoder_layers},
                  {"weighting", lggan::to_string(h.weighting)},
                  {"reconstruction", lggan::to_string(h.reconstruction)},
                  {"seed", h.seed},
                  {"validation_size", h.validation_size},
                  {"time_budget_seconds", h.time_budget_seconds},
                  {"multi_layer_labels", c.multi_layer_labels},
                  {"residual_output", c.residual_output},
                  {"max_offset", c.max_offset},
                  {"train_limit", c.lggan_train_limit},
                  {"patch_scores", c.patch_scores}};
  const auto& b = c.attack.budget;
  doc["attack"] = {{"eps", b.eps},
                   {"steps", b.steps},
                   {"step_size", b.step_size},
                   {"cw_c", b.cw_c},
                   {"cw_kappa", b.cw_kappa},
                   {"binary_search_rounds", b.binary_search_rounds},
                   {"cw_steps", b.cw_steps},
                   {"cw_learning_rate", b.cw_learning_rate},
                   {"cw_abort_early", b.cw_abort_early},
                   {"per_point_normalization", b.per_point_normalization},
                   {"fgsm_eps", c.attack.fgsm_eps},
                   {"translation_eps", c.attack.translation_eps}};
  doc["defense"] = {{"srs_drop_ratio", c.defense.srs_drop_ratio},
                    {"sor_k", c.defense.sor_k},
                    {"sor_alpha", c.defense.sor_alpha}};
  doc["eval"] = {{"seed", c.eval.seed},
                 {"limit", c.eval.limit},
                 {"cw_limit", c.eval.cw_limit},
                 {"alpha_sweep", c.eval.alpha_sweep},
                 {"sweep_epochs", c.eval.sweep_epochs},
                 {"sweep_limit", c.eval.sweep_limit}};
  return doc;
}

namespace {

// Reads the keys of one section, rejecting any key it does not know.
class SectionReader {
 public:
  SectionReader(const json& doc, const char* name) : name_(name) {
    if (doc.contains(name)) {
      section_ = &doc.at(name);
      if (!section_->is_object()) throw InvalidArgument(std::string("config: section '") + name + "' must be an object");
    }
  }

  template <typename T>
  void read(const char* key, T& field) {
    known_.insert(key);
    if (!section_ || !section_->contains(key)) return;
    try {
      field = section_->at(key).get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument("config: " + name_ + "." + key + ": " + e.what());
    }
  }

  template <typename T, typename Parse>
  void read_as(const char* key, T& field, Parse parse) {
    std::string text;
    read(key, text);
    if (!text.empty()) field = parse(text);
  }

  void finish() const {
    if (!section_) return;
    for (const auto& [key, value] : section_->items()) {
      if (!known_.count(key)) throw InvalidArgument("config: unknown key " + name_ + "." + key);
    }
  }

 private:
  std::string name_;
  const json* section_ = nullptr;
  std::set<std::string> known_;
};

}  // namespace

ExperimentConfig from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidArgument("config: top level must be an object");
  static const std::set<std::string> sections{"data", "victim", "lggan", "attack", "defense", "eval"};
  for (const auto& [key, value] : doc.items()) {
    if (!sections.count(key)) throw InvalidArgument("config: unknown section '" + key + "'");
  }
  ExperimentConfig c;

  SectionReader data(doc, "data");
  data.read("num_classes", c.data.toy.num_classes);
  data.read("num_points", c.data.toy.num_points);
  data.read("train_per_class", c.data.toy.train_per_class);
  data.read("test_per_class", c.data.toy.test_per_class);
  data.read("jitter_sigma", c.data.toy.jitter_sigma);
  data.read("jitter_clip", c.data.toy.jitter_clip);
  data.read("seed", c.data.seed);
  data.finish();

  SectionReader vic(doc, "victim");
  vic.read_as("architecture", c.victim.model.architecture, victim::parse_architecture);
  vic.read("use_tnet", c.victim.model.use_tnet);
  vic.read("normalize", c.victim.model.normalize);
  vic.read("dropout", c.victim.model.dropout);
  vic.read("point_widths", c.victim.model.point_widths);
  vic.read("head_widths", c.victim.model.head_widths);
  vic.read("global_widths", c.victim.model.global_widths);
  vic.read("pp_head_widths", c.victim.model.pp_head_widths);
  vic.read("epochs", c.victim.train.epochs);
  vic.read("batch_size", c.victim.train.batch_size);
  vic.read("learning_rate", c.victim.train.learning_rate);
  vic.read("shift_augment", c.victim.train.shift_augment);
  vic.read("seed", c.victim.train.seed);
  vic.finish();

  SectionReader gan(doc, "lggan");
  auto& h = c.lggan;
  gan.read("alpha", h.alpha);
  gan.read("beta", h.beta);
  gan.read("lr_generator", h.lr_generator);
  gan.read("lr_discriminator", h.lr_discriminator);
  gan.read("batch_size", h.batch_size);
  gan.read("epochs", h.epochs);
  gan.read("k", h.k);
  gan.read("levels", h.levels);
  gan.read("decoder_layers", h.decoder_layers);
  gan.read_as("weighting", h.weighting, lggan::parse_weighting);
  gan.read_as("reconstruction", h.reconstruction, lggan::parse_reconstruction);
  gan.read("seed", h.seed);
  gan.read("validation_size", h.validation_size);
  gan.read("time_budget_seconds", h.time_budget_seconds);
  gan.read("multi_layer_labels", c.multi_layer_labels);
  gan.read("residual_output", c.residual_output);
  gan.read("max_offset", c.max_offset);
  gan.read("train_limit", c.lggan_train_limit);
  gan.read("patch_scores", c.patch_scores);
  gan.finish();

  SectionReader atk(doc, "attack");
  auto& b = c.attack.budget;
  atk.read("eps", b.eps);
  atk.read("steps", b.steps);
  atk.read("step_size", b.step_size);
  atk.read("cw_c", b.cw_c);
  atk.read("cw_kappa", b.cw_kappa);
  atk.read("binary_search_rounds", b.binary_search_rounds);
  atk.read("cw_steps", b.cw_steps);
  atk.read("cw_learning_rate", b.cw_learning_rate);
  atk.read("cw_abort_early", b.cw_abort_early);
  atk.read("per_point_normalization", b.per_point_normalization);
  atk.read("fgsm_eps", c.attack.fgsm_eps);
  atk.read("translation_eps", c.attack.translation_eps);
  atk.finish();

  SectionReader def(doc, "defense");
  def.read("srs_drop_ratio", c.defense.srs_drop_ratio);
  def.read("sor_k", c.defense.sor_k);
  def.read("sor_alpha", c.defense.sor_alpha);
  def.finish();

  SectionReader ev(doc, "eval");
  ev.read("seed", c.eval.seed);
  ev.read("limit", c.eval.limit);
  ev.read("cw_limit", c.eval.cw_limit);
  ev.read("alpha_sweep", c.eval.alpha_sweep);
  ev.read("sweep_epochs", c.eval.sweep_epochs);
  ev.read("sweep_limit", c.eval.sweep_limit);
  ev.finish();

  c.victim.model.num_classes = c.data.toy.num_classes;
  c.victim.model.num_points = c.data.toy.num_points;
  c.lggan.num_classes = c.data.toy.num_classes;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw MalformedInput("config: " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InvalidArgument("config: cannot write " + path.string());
  os << to_json(config).dump(2) << '\n';
}

}  // namespace pcadv::config
