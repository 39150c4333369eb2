#include "helpers.hpp"

#include "pcadv/checkpoint.hpp"
#include "pcadv/config.hpp"
#include "pcadv/evaluate.hpp"
#include "pcadv/pipeline.hpp"
#include "pcadv/report.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

using namespace pcadv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pcadv_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& s, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(s, v);
}

victim::VictimModel<float> tiny_victim(int classes = 4) {
  victim::VictimConfig c;
  c.num_classes = classes;
  c.point_widths = {8, 8};
  c.head_widths = {8};
  victim::VictimModel<float> m(c);
  nn::initialize(m, 2);
  return m;
}

}  // namespace

TEST_CASE("packed datasets round trip bit for bit") {
  const auto toy = testing::small_toy(3, 1, 2, 4, 64);
  const fs::path dir = scratch("packed");
  data::save_packed(toy.train, dir / "train.pcad");
  const data::Dataset back = data::load_dataset(dir / "train.pcad", data::Format::packed);
  REQUIRE(back.size() == toy.train.size());
  CHECK(back.num_points == 64);
  CHECK(back.class_names == toy.train.class_names);
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.clouds[i].label == toy.train.clouds[i].label);
    CHECK(back.clouds[i].points == toy.train.clouds[i].points);
  }
  data::save_ascii_dir(toy.train, dir / "ascii");
  const data::Dataset ascii = data::load_dataset(dir / "ascii", data::Format::ascii_dir);
  REQUIRE(ascii.size() == toy.train.size());
  for (std::size_t i = 0; i < ascii.size(); ++i) {
    CHECK(ascii.clouds[i].label == toy.train.clouds[i].label);
    CHECK(ascii.clouds[i].points == toy.train.clouds[i].points);
  }
}

TEST_CASE("packed layout matches a hand-written byte dump") {
  // Three clouds of four points, already unit-cube normalized.
  const float pts[3][4][3] = {
      {{-0.5f, 0, 0}, {0.5f, 0, 0}, {0, 0.25f, 0}, {0, -0.25f, 0}},
      {{0, -0.5f, 0.5f}, {0, 0.5f, -0.5f}, {0, 0, 0}, {0, 0.125f, 0.25f}},
      {{0.5f, 0.5f, 0.5f}, {-0.5f, -0.5f, -0.5f}, {0.25f, 0, -0.25f}, {0, 0, 0}}};
  const std::uint32_t labels[3] = {1, 0, 1};
  std::string bytes = "PCAD";
  put_u32(bytes, 1);
  put_u32(bytes, 3);
  put_u32(bytes, 4);
  put_u32(bytes, 2);
  for (int c = 0; c < 3; ++c) {
    put_u32(bytes, labels[c]);
    for (int p = 0; p < 4; ++p)
      for (int a = 0; a < 3; ++a) put_f32(bytes, pts[c][p][a]);
  }
  REQUIRE(bytes.size() == 20 + 3 * (4 + 48));
  const fs::path dir = scratch("bytes");
  {
    std::ofstream out(dir / "hand.pcad", std::ios::binary);
    out << bytes;
  }
  const data::Dataset ds = data::load_dataset(dir / "hand.pcad", data::Format::packed);
  REQUIRE(ds.size() == 3);
  CHECK(ds.num_classes() == 2);
  for (int c = 0; c < 3; ++c) {
    CHECK(ds.clouds[std::size_t(c)].label == int(labels[c]));
    for (int p = 0; p < 4; ++p)
      for (int a = 0; a < 3; ++a) CHECK(ds.clouds[std::size_t(c)].points(p, a) == pts[c][p][a]);
  }
  data::save_packed(ds, dir / "again.pcad");
  CHECK(slurp(dir / "again.pcad") == bytes);

  // Every truncation point is rejected.
  for (std::size_t cut : {std::size_t(0), std::size_t(3), std::size_t(19), bytes.size() - 1}) {
    std::ofstream(dir / "cut.pcad", std::ios::binary) << bytes.substr(0, cut);
    CHECK_THROWS_AS(data::load_dataset(dir / "cut.pcad", data::Format::packed), MalformedInput);
  }
  std::string bad_label = bytes;
  bad_label[20] = 5;
  std::ofstream(dir / "label.pcad", std::ios::binary) << bad_label;
  CHECK_THROWS_AS(data::load_dataset(dir / "label.pcad", data::Format::packed), MalformedInput);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::ofstream(dir / "magic.pcad", std::ios::binary) << bad_magic;
  CHECK_THROWS_AS(data::load_dataset(dir / "magic.pcad", data::Format::packed), MalformedInput);
}

TEST_CASE("toy datasets are deterministic and class balanced") {
  const auto a = testing::small_toy(5, 2, 9, 4, 64);
  const auto b = testing::small_toy(5, 2, 9, 4, 64);
  REQUIRE(a.train.size() == 20);
  std::map<int, int> histogram;
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train.clouds[i].points == b.train.clouds[i].points);
    ++histogram[a.train.clouds[i].label];
  }
  CHECK(histogram == std::map<int, int>{{0, 5}, {1, 5}, {2, 5}, {3, 5}});
  CHECK(a.test.size() == 8);
  CHECK(testing::small_toy(5, 2, 10, 4, 64).train.clouds[0].points != a.train.clouds[0].points);

  std::mt19937_64 rng(1);
  const Points<float> sphere = data::sample_shape(data::ShapeKind::sphere, 256, 0.01, 0.02, rng);
  const Eigen::VectorXd r = sphere.cast<double>().rowwise().norm();
  // Each coordinate moves by at most 0.02, so the radius by at most 0.02 sqrt(3).
  CHECK(r.maxCoeff() <= 0.5 + 0.02 * std::sqrt(3.0) + 1e-6);
  CHECK(r.minCoeff() >= 0.5 - 0.02 * std::sqrt(3.0) - 1e-6);

  data::ToyConfig bad;
  bad.num_classes = 9;
  CHECK_THROWS_AS(data::make_toy_dataset(bad, 1), InvalidArgument);
}

TEST_CASE("checkpoints round trip and reject corruption") {
  auto v = tiny_victim();
  config::ExperimentConfig cfg;
  cfg.victim.model = v.config();
  cfg.victim.train.epochs = 17;
  cfg.data.seed = 123;
  const fs::path dir = scratch("ckpt");
  pipeline::save_victim(v, cfg, dir / "v.ckpt");
  const auto loaded = pipeline::load_victim(dir / "v.ckpt");
  const Points<float> x = testing::random_cloud(32, 4);
  CHECK(loaded.model->logits(x) == v.logits(x));
  CHECK(nn::flatten_values(*loaded.model) == nn::flatten_values(v));
  CHECK(loaded.config.victim.train.epochs == 17);
  CHECK(loaded.config.data.seed == 123);
  CHECK(config::to_json(loaded.config) == config::to_json(cfg));

  pipeline::save_victim(v, cfg, dir / "w.ckpt");
  CHECK(slurp(dir / "v.ckpt") == slurp(dir / "w.ckpt"));

  const std::string good = slurp(dir / "v.ckpt");
  std::string corrupt = good;
  corrupt[16] = '#';  // first manifest byte
  std::ofstream(dir / "bad.ckpt", std::ios::binary) << corrupt;
  CHECK_THROWS_AS(io::load_checkpoint(dir / "bad.ckpt"), MalformedInput);
  std::string version = good;
  version[4] = 9;
  std::ofstream(dir / "ver.ckpt", std::ios::binary) << version;
  CHECK_THROWS_AS(io::load_checkpoint(dir / "ver.ckpt"), MalformedInput);
  std::ofstream(dir / "short.ckpt", std::ios::binary) << good.substr(0, good.size() - 4);
  CHECK_THROWS_AS(io::load_checkpoint(dir / "short.ckpt"), MalformedInput);

  io::Checkpoint ckpt = io::load_checkpoint(dir / "v.ckpt");
  ckpt.arrays.front().rows += 1;
  ckpt.arrays.front().values.resize(std::size_t(ckpt.arrays.front().rows * ckpt.arrays.front().cols));
  auto other = tiny_victim();
  CHECK_THROWS_AS(io::restore_model(ckpt, other), MalformedInput);
}

TEST_CASE("lggan checkpoints echo their training configuration") {
  config::ExperimentConfig cfg;
  cfg.lggan.alpha = 3.5;
  cfg.lggan.seed = 77;
  cfg.lggan.levels = 2;
  cfg.lggan.decoder_layers = 2;
  lggan::TrainedLggan t{lggan::Generator<float>(cfg.generator_config()),
                        lggan::Discriminator<float>(cfg.discriminator_config()), {}, {}};
  nn::initialize(t.generator, 1);
  lggan::initialize_discriminator(t.discriminator, 2);
  const fs::path dir = scratch("gan");
  pipeline::save_lggan(t, cfg, dir / "g.ckpt");
  const auto back = pipeline::load_lggan(dir / "g.ckpt");
  CHECK(back.config.lggan.alpha == 3.5);
  CHECK(back.config.lggan.seed == 77);
  CHECK(nn::flatten_values(*back.generator) == nn::flatten_values(t.generator));
  CHECK(nn::flatten_values(*back.discriminator) == nn::flatten_values(t.discriminator));
  CHECK(io::load_checkpoint(dir / "g.ckpt").manifest.at("kind") == "lggan");
}

TEST_CASE("configuration files are strict and round trip") {
  config::ExperimentConfig cfg;
  cfg.lggan.alpha = 0.25;
  cfg.attack.budget.eps = 1.5;
  cfg.eval.alpha_sweep = {1, 2};
  const fs::path dir = scratch("config");
  config::save_config(cfg, dir / "c.json");
  const auto back = config::load_config(dir / "c.json");
  CHECK(config::to_json(back) == config::to_json(cfg));

  nlohmann::json doc = config::to_json(cfg);
  doc["lggan"]["alhpa"] = 1.0;
  CHECK_THROWS_AS(config::from_json(doc), InvalidArgument);
  doc = config::to_json(cfg);
  doc["mystery"] = nlohmann::json::object();
  CHECK_THROWS_AS(config::from_json(doc), InvalidArgument);
  doc = nlohmann::json::object();
  CHECK(config::to_json(config::from_json(doc)) == config::to_json(config::ExperimentConfig{}));
  CHECK(cfg.attack.fgsm_step(256) == doctest::Approx(1.5 / std::sqrt(768.0)));
}

TEST_CASE("evaluation rows partition predictions and re-aggregate exactly") {
  const auto toy = testing::small_toy(2, 4, 3, 4, 64);
  auto v = tiny_victim();
  eval::AttackSpec spec;
  spec.kind = eval::AttackKind::fgsm;
  spec.fgsm_eps = 0.05;
  const std::vector<eval::DefenseSpec> defenses = {eval::parse_defense("srs"),
                                                   eval::parse_defense("sor"),
                                                   eval::parse_defense("recenter")};
  const auto report = eval::evaluate_attack(spec, v, "pointnet", toy.test, defenses, {});
  REQUIRE(report.rows.size() == 4);
  CHECK(report.rows[0].defense == "none");
  CHECK(report.instances.size() == 4 * toy.test.size());
  for (const auto& row : report.rows) {
    CHECK(row.instances == int(toy.test.size()));
    CHECK(row.asr + row.accuracy + row.other == doctest::Approx(100.0));
    int hits = 0;
    for (const auto& r : report.instances) {
      if (r.defense == row.defense) hits += r.success;
    }
    CHECK(row.asr == doctest::Approx(100.0 * hits / row.instances).epsilon(1e-12));
  }
  const auto again = eval::aggregate(report.instances);
  REQUIRE(again.size() == report.rows.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i].asr == report.rows[i].asr);
    CHECK(again[i].mean_l2 == report.rows[i].mean_l2);
    CHECK(again[i].mean_chamfer == report.rows[i].mean_chamfer);
  }
  const auto targets = eval::sample_targets(toy.test, 11);
  for (const auto& r : report.instances) {
    CHECK(r.target == targets[std::size_t(r.index)]);
    CHECK(r.target != toy.test.clouds[std::size_t(r.index)].label);
  }
}

TEST_CASE("the null attack measures plain accuracy") {
  const auto toy = testing::small_toy(2, 5, 4, 4, 64);
  auto v = tiny_victim();
  eval::AttackSpec spec;
  const auto report = eval::evaluate_attack(spec, v, "pointnet", toy.test, {}, {});
  int correct = 0;
  for (const auto& c : toy.test.clouds) correct += v.predict(c.points) == c.label;
  CHECK(report.rows.at(0).accuracy ==
        doctest::Approx(100.0 * correct / double(toy.test.size())));
  CHECK(report.rows.at(0).mean_l2 == 0.0);
}

TEST_CASE("reports round trip through csv and json") {
  const auto toy = testing::small_toy(2, 2, 5, 4, 64);
  auto v = tiny_victim();
  eval::AttackSpec spec;
  spec.kind = eval::AttackKind::ifgm;
  auto report = eval::evaluate_attack(spec, v, "pointnet", toy.test,
                                      {eval::parse_defense("srs")}, {});
  const fs::path dir = scratch("report");
  const auto written =
      report::emit_report(report, {report::Format::csv, report::Format::json}, dir, "t");
  CHECK(written.size() == 2);
  std::ifstream csv(dir / "t.csv");
  int lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  CHECK(lines == int(report.rows.size()) + 1);

  const auto back = report::read_json(dir / "t.json");
  CHECK(report::to_json(back) == report::to_json(report));
  REQUIRE(back.rows.size() == report.rows.size());
  CHECK(back.rows[1].defense == report.rows[1].defense);
  CHECK(back.instances.size() == report.instances.size());
}

TEST_CASE("sweep plot markers carry the report values") {
  std::vector<report::SweepPoint> sweep = {
      {0.1, 40.0, 0.01, 0.02, 3}, {1, 62.5, 0.02, 0.03, 3}, {10, 90.0, 0.05, 0.04, 3}};
  const fs::path dir = scratch("sweep");
  report::write_sweep_svg(sweep, dir / "s.svg");
  const std::string svg = slurp(dir / "s.svg");
  const std::regex marker(
      R"re(data-series="([a-z_0-9]+)" data-alpha="([^"]+)" data-value="([^"]+)")re");
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), marker); it != std::sregex_iterator();
       ++it) {
    series[(*it)[1]].push_back({std::stod((*it)[2]), std::stod((*it)[3])});
  }
  REQUIRE(series["asr"].size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(series["asr"][i].first == doctest::Approx(sweep[i].alpha));
    CHECK(series["asr"][i].second == doctest::Approx(sweep[i].asr));
    CHECK(series["mean_l2"][i].second == doctest::Approx(sweep[i].mean_l2));
    CHECK(series["mean_chamfer"][i].second == doctest::Approx(sweep[i].mean_chamfer));
  }
  const auto back = report::sweep_from_json(report::sweep_to_json(sweep));
  REQUIRE(back.size() == 3);
  CHECK(back[2].asr == 90.0);
}
