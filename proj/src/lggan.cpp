#include "pcadv/lggan.hpp"

#include "pcadv/nn/adam.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>

namespace pcadv::lggan {

using nn::Tape;
using nn::Trainable;
using nn::Var;

std::string to_string(LossWeighting w) {
  return w == LossWeighting::experimental ? "experimental" : "equation";
}

LossWeighting parse_weighting(const std::string& s) {
  if (s == "experimental") return LossWeighting::experimental;
  if (s == "equation") return LossWeighting::equation;
  throw InvalidArgument("unknown loss weighting '" + s + "' (experimental|equation)");
}

std::string to_string(ReconstructionMode m) {
  return m == ReconstructionMode::l2 ? "l2" : "chamfer";
}

ReconstructionMode parse_reconstruction(const std::string& s) {
  if (s == "l2") return ReconstructionMode::l2;
  if (s == "chamfer") return ReconstructionMode::chamfer;
  throw InvalidArgument("unknown reconstruction mode '" + s + "' (l2|chamfer)");
}

void HyperParams::validate() const {
  if (!(alpha >= 0) || !(beta >= 0) || !(lr_generator > 0) || !(lr_discriminator > 0) ||
      batch_size < 1 || epochs < 0 || k < 1 || num_classes < 2) {
    throw InvalidArgument(
        "lggan hyperparameters: weights must be non-negative, learning rates positive, "
        "batch size and k at least 1, and at least 2 classes");
  }
}

template <typename T>
LabelCode<T> encode_label(int target, int num_classes, int layers) {
  if (target < 0 || target >= num_classes) {
    throw InvalidArgument("encode_label: target " + std::to_string(target) + " out of range [0, " +
                          std::to_string(num_classes) + ")");
  }
  LabelCode<T> code;
  code.target = target;
  Matrix<T> one_hot = Matrix<T>::Zero(1, num_classes);
  one_hot(0, target) = T(1);
  code.codes.assign(std::size_t(std::max(layers, 0)), one_hot);
  return code;
}

// ---------------------------------------------------------------------------
// Generator

template <typename T>
Generator<T>::Generator(GeneratorConfig config) : config_(std::move(config)) {
  if (config_.levels.empty() || config_.decoder_widths.empty()) {
    throw InvalidArgument("generator: need at least one encoder level and one decoder layer");
  }
  Eigen::Index channels = 0;
  for (std::size_t i = 0; i < config_.levels.size(); ++i) {
    const EncoderLevel& level = config_.levels[i];
    if (level.point_divisor < 1 || !(level.radius > 0) || level.neighbors < 1 ||
        level.widths.empty()) {
      throw InvalidArgument("generator: malformed encoder level " + std::to_string(i));
    }
    encoder_.emplace_back("enc" + std::to_string(i), 3 + channels, level.widths);
    channels = level.widths.back();
    reducers_.emplace_back("up" + std::to_string(i), channels, config_.level_channels);
  }
  Eigen::Index width = config_.aggregate_width();
  for (std::size_t j = 0; j < config_.decoder_widths.size(); ++j) {
    const bool labelled = config_.multi_layer_labels || j == 0;
    decoder_.emplace_back("dec" + std::to_string(j), width + (labelled ? config_.num_classes : 0),
                          config_.decoder_widths[j]);
    width = config_.decoder_widths[j];
  }
  output_ = nn::Dense<T>("out", width, 3);
}

template <typename T>
FeaturePyramid<T> Generator<T>::encode_points(Tape<T>& tape, Var<T> cloud, Trainable trainable) {
  const auto n = std::size_t(cloud.rows());
  for (const auto& level : config_.levels) {
    if (n == 0 || n % std::size_t(level.point_divisor) != 0) {
      throw InvalidArgument("encode_points: point count " + std::to_string(n) +
                            " is not divisible by " + std::to_string(level.point_divisor));
    }
  }
  FeaturePyramid<T> pyramid;
  Var<T> src = cloud;
  Var<T> src_features;
  std::vector<int> src_index(n);
  std::iota(src_index.begin(), src_index.end(), 0);
  for (std::size_t i = 0; i < config_.levels.size(); ++i) {
    const EncoderLevel& level = config_.levels[i];
    const Points<T>& pts = src.value();
    const std::size_t m = n / std::size_t(level.point_divisor);
    if (m > std::size_t(pts.rows())) {
      throw InvalidArgument("encode_points: level " + std::to_string(i) +
                            " samples more points than the previous level holds");
    }
    const auto picked = geometry::farthest_point_sample(pts, m, geometry::canonical_seed(pts));
    Var<T> centroids = nn::gather_rows(src, picked);
    const auto k = std::size_t(level.neighbors);
    const auto groups = geometry::ball_query(centroids.value(), pts, level.radius, k).padded(k);
    std::vector<int> owner(groups.size());
    for (std::size_t j = 0; j < owner.size(); ++j) owner[j] = int(j / k);
    Var<T> local = nn::sub(nn::gather_rows(src, groups), nn::gather_rows(centroids, owner));
    if (i > 0) {
      const Var<T> parts[] = {local, nn::gather_rows(src_features, groups)};
      local = nn::concat_cols<T>(parts);
    }
    Var<T> features = nn::max_pool_group(nn::pointwise_mlp(tape, local, encoder_[i], trainable),
                                         Eigen::Index(k));
    PyramidLevel<T> out;
    out.source_index.reserve(m);
    for (int p : picked) out.source_index.push_back(src_index[std::size_t(p)]);
    out.points = centroids;
    out.features = features;
    src_index = out.source_index;
    src = centroids;
    src_features = features;
    pyramid.levels.push_back(std::move(out));
  }
  return pyramid;
}

template <typename T>
Var<T> Generator<T>::decode_points(Tape<T>& tape, const FeaturePyramid<T>& pyramid,
                                   const LabelCode<T>& label, Var<T> cloud, Trainable trainable) {
  if (pyramid.levels.size() != reducers_.size()) {
    throw InvalidArgument("decode_points: pyramid has " + std::to_string(pyramid.levels.size()) +
                          " levels, decoder expects " + std::to_string(reducers_.size()));
  }
  const std::size_t labelled_layers = config_.multi_layer_labels ? decoder_.size() : 1;
  if (label.codes.size() < labelled_layers) {
    throw InvalidArgument("decode_points: label code has too few layers");
  }
  std::vector<Var<T>> parts;
  for (std::size_t i = 0; i < pyramid.levels.size(); ++i) {
    const PyramidLevel<T>& level = pyramid.levels[i];
    if (level.features.cols() != reducers_[i].in()) {
      throw InvalidArgument("decode_points: level " + std::to_string(i) + " width mismatch");
    }
    auto iw = geometry::interpolation_weights(cloud.value(), level.points.value());
    Var<T> up = nn::weighted_rows(level.features, std::move(iw.indices), std::move(iw.weights),
                                  Eigen::Index(geometry::InterpolationWeights::kNeighbors));
    parts.push_back(nn::relu(reducers_[i].forward(tape, up, trainable)));
  }
  parts.push_back(cloud);
  Var<T> x = nn::concat_cols<T>(parts);
  for (std::size_t j = 0; j < decoder_.size(); ++j) {
    if (j < labelled_layers) {
      const Matrix<T>& code = label.codes[j];
      if (code.cols() != config_.num_classes) {
        throw InvalidArgument("decode_points: label code has the wrong class count");
      }
      Var<T> z = tape.constant(code.replicate(x.rows(), 1));
      const Var<T> cat[] = {z, x};
      x = nn::concat_cols<T>(cat);
    }
    x = nn::relu(decoder_[j].forward(tape, x, trainable));
  }
  Var<T> out = output_.forward(tape, x, trainable);
  if (!config_.residual_output) return out;
  if (config_.max_offset > 0) {
    const T b = T(config_.max_offset);
    out = nn::scale(nn::tanh(nn::scale(out, T(1) / b)), b);
  }
  return nn::add(cloud, out);
}

template <typename T>
Var<T> Generator<T>::forward(Tape<T>& tape, Var<T> cloud, int target, Trainable trainable) {
  const LabelCode<T> label =
      encode_label<T>(target, config_.num_classes, int(config_.decoder_widths.size()));
  const FeaturePyramid<T> pyramid = encode_points(tape, cloud, trainable);
  return decode_points(tape, pyramid, label, cloud, trainable);
}

template <typename T>
Points<T> Generator<T>::generate(const Points<T>& cloud, int target) {
  Tape<T> tape;
  return forward(tape, tape.constant_ref(cloud), target, Trainable::no).value();
}

// ---------------------------------------------------------------------------
// Discriminator

template <typename T>
geometry::NeighborIndex knn_graph(const Points<T>& points, std::size_t k) {
  const geometry::NeighborIndex wide = geometry::knn(points, points, k + 1);
  geometry::NeighborIndex out;
  for (std::size_t q = 0; q < wide.queries(); ++q) {
    auto idx = wide.neighbors(q);
    auto dist = wide.neighbor_distances(q);
    std::size_t skip = k;  // drop the farthest when the point itself is absent
    for (std::size_t j = 0; j <= k; ++j) {
      if (idx[j] == int(q)) {
        skip = j;
        break;
      }
    }
    for (std::size_t j = 0; j <= k; ++j) {
      if (j == skip) continue;
      out.indices.push_back(idx[j]);
      out.distances.push_back(dist[j]);
    }
    out.offsets.push_back(out.indices.size());
  }
  return out;
}

template <typename T>
Var<T> graph_conv(Var<T> w0, Var<T> w1, const geometry::NeighborIndex& graph, Var<T> features) {
  if (graph.queries() != std::size_t(features.rows())) {
    throw InvalidArgument("graph_conv: graph has " + std::to_string(graph.queries()) +
                          " vertices but features have " + std::to_string(features.rows()) +
                          " rows");
  }
  if (graph.queries() == 0 || graph.indices.empty()) {
    throw InvalidArgument("graph_conv: empty graph");
  }
  const std::size_t k = graph.indices.size() / graph.queries();
  for (std::size_t q = 0; q < graph.queries(); ++q) {
    if (graph.neighbors(q).size() != k) {
      throw InvalidArgument("graph_conv: vertices must have equal neighbor counts");
    }
  }
  Var<T> neighborhood = nn::group_sum(nn::gather_rows(features, graph.indices), Eigen::Index(k));
  return nn::add(nn::matmul(features, w0), nn::matmul(neighborhood, w1));
}

template <typename T>
ResidualGraphBlock<T>::ResidualGraphBlock(const std::string& name, Eigen::Index width)
    : w0a(name + ".w0a", width, width),
      w1a(name + ".w1a", width, width),
      w0b(name + ".w0b", width, width),
      w1b(name + ".w1b", width, width) {}

template <typename T>
Var<T> ResidualGraphBlock<T>::forward(Tape<T>& tape, const geometry::NeighborIndex& graph,
                                      Var<T> features, Trainable trainable) {
  Var<T> h = nn::relu(graph_conv(tape.parameter(w0a, trainable), tape.parameter(w1a, trainable),
                                 graph, features));
  Var<T> y = graph_conv(tape.parameter(w0b, trainable), tape.parameter(w1b, trainable), graph, h);
  return nn::add(features, y);
}

template <typename T>
Discriminator<T>::Discriminator(DiscriminatorConfig config) : config_(std::move(config)) {
  if (config_.head_widths.empty() || config_.k < 1 || config_.pool_divisor < 1) {
    throw InvalidArgument("discriminator: malformed configuration");
  }
  head_ = nn::Mlp<T>("disc.head", 3, config_.head_widths);
  for (int i = 0; i < config_.residual_blocks; ++i) {
    blocks_.emplace_back("disc.block" + std::to_string(i), head_.out());
  }
  output_ = nn::Dense<T>("disc.out", head_.out(), 1);
}

template <typename T>
Var<T> Discriminator<T>::forward(Tape<T>& tape, Var<T> cloud, Trainable trainable) {
  const Points<T>& pts = cloud.value();
  const auto n = std::size_t(pts.rows());
  if (n < 2 || pts.cols() != 3) throw InvalidArgument("discriminator: need an N x 3 cloud, N >= 2");
  const std::size_t k = std::min<std::size_t>(std::size_t(config_.k), n);

  // Feature head: pointwise layers, then max over each point's k neighbors.
  Var<T> h = nn::pointwise_mlp(tape, cloud, head_, trainable);
  h = nn::max_pool_group(nn::gather_rows(h, geometry::knn(pts, pts, k).indices), Eigen::Index(k));

  // Pool block: FPS seeds gather the max over their neighborhoods.
  const std::size_t m = std::max<std::size_t>(1, n / std::size_t(config_.pool_divisor));
  const auto picked = geometry::farthest_point_sample(pts, m, geometry::canonical_seed(pts));
  Var<T> seeds = nn::gather_rows(cloud, picked);
  Var<T> f = nn::max_pool_group(
      nn::gather_rows(h, geometry::knn(seeds.value(), pts, k).indices), Eigen::Index(k));

  const std::size_t kg = std::min<std::size_t>(std::size_t(config_.k), m - 1);
  if (kg >= 1) {
    const geometry::NeighborIndex graph = knn_graph(seeds.value(), kg);
    for (auto& block : blocks_) f = block.forward(tape, graph, f, trainable);
  }
  if (!config_.patch_scores) f = nn::max_pool_group(f, f.rows());
  return output_.forward(tape, f, trainable);
}

template <typename T>
double Discriminator<T>::score(const Points<T>& cloud) {
  Tape<T> tape;
  return double(forward(tape, tape.constant_ref(cloud), Trainable::no).value().mean());
}

template <typename T>
void initialize_generator(Generator<T>& gen, std::uint64_t seed, double output_scale) {
  nn::initialize(gen, seed);
  gen.output_layer().weight.value *= T(output_scale);
}

template <typename T>
void initialize_discriminator(Discriminator<T>& disc, std::uint64_t seed) {
  nn::initialize(disc, seed);
  const T shrink = T(1) / std::sqrt(T(disc.config().k + 1));
  for (std::size_t i = 0; i < disc.block_count(); ++i) {
    auto& b = disc.block(i);
    b.w0a.value *= shrink;
    b.w1a.value *= shrink;
    b.w0b.value.setZero();
    b.w1b.value.setZero();
  }
}

// ---------------------------------------------------------------------------
// Losses

template <typename T>
GeneratorLoss<T> loss_generator(Var<T> logits, Var<T> adversarial, Var<T> clean,
                                std::optional<Var<T>> d_score, int target, const HyperParams& hp) {
  if (adversarial.rows() != clean.rows() || adversarial.cols() != 3 || clean.cols() != 3) {
    throw InvalidArgument("loss_generator: adversarial and clean clouds differ in shape");
  }
  GeneratorLoss<T> out;
  Var<T> cls = nn::softmax_cross_entropy(logits, target);
  Var<T> rec = hp.reconstruction == ReconstructionMode::l2
                   ? nn::mean_squared_displacement(adversarial, clean)
                   : nn::chamfer(adversarial, clean);
  const bool alpha_on_cls = hp.weighting == LossWeighting::experimental;
  const T w_cls = T(alpha_on_cls ? hp.alpha : 1.0);
  const T w_rec = T(alpha_on_cls ? 1.0 : hp.alpha);
  out.classification = double(cls.item());
  out.reconstruction = double(rec.item());
  Var<T> total = nn::add(nn::scale(cls, w_cls), nn::scale(rec, w_rec));
  if (d_score) {
    Var<T> gap = nn::add_scalar(nn::scale(*d_score, T(-1)), T(1));
    Var<T> dis = nn::scale(nn::sum_squares(gap), T(1) / T(gap.rows()));
    out.discriminative = double(dis.item());
    if (hp.beta > 0) total = nn::add(total, nn::scale(dis, T(hp.beta)));
  }
  out.total = total;
  return out;
}

template <typename T>
Var<T> loss_discriminator(Var<T> score_real, Var<T> score_fake) {
  Var<T> fake = nn::scale(nn::sum_squares(score_fake), T(0.5) / T(score_fake.rows()));
  Var<T> gap = nn::add_scalar(nn::scale(score_real, T(-1)), T(1));
  Var<T> real = nn::scale(nn::sum_squares(gap), T(0.5) / T(gap.rows()));
  return nn::add(fake, real);
}

// ---------------------------------------------------------------------------
// Training and attack

int sample_target(int truth, int num_classes, std::mt19937_64& rng) {
  if (num_classes < 2) throw InvalidArgument("sample_target: need at least 2 classes");
  std::uniform_int_distribution<int> pick(0, num_classes - 2);
  int t = pick(rng);
  if (truth >= 0 && t >= truth) ++t;
  return t;
}

double targeted_success_rate(Generator<float>& generator, victim::VictimModel<float>& victim,
                             const data::Dataset& clouds, std::span<const int> targets) {
  if (clouds.clouds.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < clouds.clouds.size(); ++i) {
    hits += victim.predict(generator.generate(clouds.clouds[i].points, targets[i])) == targets[i];
  }
  return 100.0 * double(hits) / double(clouds.clouds.size());
}

namespace {

data::Dataset slice(const data::Dataset& ds, std::size_t count) {
  data::Dataset out = ds;
  if (out.clouds.size() > count) out.clouds.resize(count);
  return out;
}

}  // namespace

void train_lggan_into(TrainedLggan& state, victim::VictimModel<float>& victim,
                      const data::Dataset& train, const data::Dataset& validation,
                      const HyperParams& hp,
                      const std::function<void(const EpochLog&)>& on_epoch) {
  hp.validate();
  if (train.clouds.empty()) throw InvalidArgument("train_lggan: empty training set");
  if (train.num_classes() != hp.num_classes || victim.num_classes() != hp.num_classes) {
    throw InvalidArgument("train_lggan: class counts of data, victim and hyperparameters differ");
  }
  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - started).count(); };

  Generator<float>& gen = state.generator;
  Discriminator<float>& disc = state.discriminator;
  nn::Adam<float> adam_g({hp.lr_generator});
  nn::Adam<float> adam_d({hp.lr_discriminator});

  const data::Dataset val = slice(validation, std::size_t(std::max(hp.validation_size, 0)));
  std::vector<int> val_targets;
  {
    std::mt19937_64 rng(hp.seed ^ 0x5eedf00dull);
    for (const auto& c : val.clouds) val_targets.push_back(sample_target(c.label, hp.num_classes, rng));
  }

  std::vector<std::size_t> order(train.clouds.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(hp.seed);
  const auto batch = std::size_t(hp.batch_size);
  bool out_of_time = false;

  for (int epoch = 0; epoch < hp.epochs && !out_of_time; ++epoch) {
    const auto epoch_start = elapsed();
    const std::vector<double> good_g = nn::flatten_values(gen);
    const std::vector<double> good_d = nn::flatten_values(disc);
    auto roll_back = [&](const std::string& why) {
      nn::assign_values(gen, good_g);
      nn::assign_values(disc, good_d);
      state.divergence = "epoch " + std::to_string(epoch + 1) + ": " + why;
    };
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::mt19937_64 target_rng(hp.seed * 1000003ull + std::uint64_t(epoch));
    EpochLog log;
    log.epoch = epoch + 1;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      const float inv = 1.0f / float(stop - start);
      std::vector<std::unique_ptr<Tape<float>>> tapes;
      std::vector<Var<float>> fakes, cleans;
      std::vector<int> targets;
      for (std::size_t b = start; b < stop; ++b) {
        const auto& sample = train.clouds[order[b]];
        auto& tape = *tapes.emplace_back(std::make_unique<Tape<float>>());
        targets.push_back(sample_target(sample.label, hp.num_classes, target_rng));
        cleans.push_back(tape.constant_ref(sample.points));
        fakes.push_back(gen.forward(tape, cleans.back(), targets.back(), Trainable::yes));
      }
      try {
        // Discriminator step on detached generator outputs.
        nn::zero_grad(disc);
        double d_loss = 0.0;
        for (std::size_t b = 0; b < tapes.size(); ++b) {
          Tape<float> tape;
          Var<float> real = disc.forward(tape, tape.constant_ref(cleans[b].value()), Trainable::yes);
          Var<float> fake = disc.forward(tape, tape.constant(fakes[b].value()), Trainable::yes);
          Var<float> loss = loss_discriminator(real, fake);
          d_loss += loss.item();
          tape.backward(nn::scale(loss, inv));
        }
        if (!std::isfinite(d_loss)) throw Divergence("non-finite discriminator loss");
        adam_d.step(disc);

        // Generator step through the frozen victim and the updated D.
        nn::zero_grad(gen);
        for (std::size_t b = 0; b < tapes.size(); ++b) {
          Tape<float>& tape = *tapes[b];
          Var<float> logits = victim.forward(tape, fakes[b], Trainable::no);
          std::optional<Var<float>> score;
          if (hp.beta > 0) score = disc.forward(tape, fakes[b], Trainable::no);
          GeneratorLoss<float> loss =
              loss_generator(logits, fakes[b], cleans[b], score, targets[b], hp);
          if (!std::isfinite(loss.total.item())) throw Divergence("non-finite generator loss");
          log.classification += loss.classification;
          log.reconstruction += loss.reconstruction;
          log.discriminative += loss.discriminative;
          tape.backward(nn::scale(loss.total, inv));
        }
        adam_g.step(gen);
        log.discriminator += d_loss;
      } catch (const Divergence& e) {
        roll_back(e.what());
        return;
      }
      seen += tapes.size();
      if (hp.time_budget_seconds > 0 && elapsed() > hp.time_budget_seconds) {
        out_of_time = true;
        break;
      }
    }
    const double denom = double(std::max<std::size_t>(seen, 1));
    log.classification /= denom;
    log.reconstruction /= denom;
    log.discriminative /= denom;
    log.discriminator /= denom;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < val.clouds.size(); ++i) {
      const Points<float> adv = gen.generate(val.clouds[i].points, val_targets[i]);
      hits += victim.predict(adv) == val_targets[i];
      log.validation_chamfer += geometry::chamfer_distance(adv, val.clouds[i].points);
    }
    if (!val.clouds.empty()) {
      log.success_rate = 100.0 * double(hits) / double(val.clouds.size());
      log.validation_chamfer /= double(val.clouds.size());
    }
    log.seconds = elapsed() - epoch_start;
    state.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
}

TrainedLggan train_lggan(victim::VictimModel<float>& victim, const data::Dataset& train,
                         const data::Dataset& validation, const GeneratorConfig& gen_config,
                         const DiscriminatorConfig& disc_config, const HyperParams& hp,
                         const std::function<void(const EpochLog&)>& on_epoch) {
  TrainedLggan state{Generator<float>(gen_config), Discriminator<float>(disc_config), {}, {}};
  initialize_generator(state.generator, hp.seed);
  initialize_discriminator(state.discriminator, hp.seed + 1);
  train_lggan_into(state, victim, train, validation, hp, on_epoch);
  return state;
}

AttackResult attack_lggan(Generator<float>& generator, victim::VictimModel<float>& victim,
                          const Points<float>& cloud, int target) {
  if (target < 0 || target >= generator.config().num_classes) {
    throw InvalidArgument("attack_lggan: target out of range");
  }
  AttackResult result;
  result.target = target;
  const auto start = std::chrono::steady_clock::now();
  result.adversarial = generator.generate(cloud, target);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.generator_passes = 1;
  measure_attack(victim, cloud, result);
  return result;
}

#define PCADV_INSTANTIATE_LGGAN(T)                                                           \
  template LabelCode<T> encode_label<T>(int, int, int);                                      \
  template class Generator<T>;                                                               \
  template class Discriminator<T>;                                                           \
  template void initialize_generator(Generator<T>&, std::uint64_t, double);                  \
  template void initialize_discriminator(Discriminator<T>&, std::uint64_t);                  \
  template struct ResidualGraphBlock<T>;                                                     \
  template geometry::NeighborIndex knn_graph(const Points<T>&, std::size_t);                 \
  template Var<T> graph_conv(Var<T>, Var<T>, const geometry::NeighborIndex&, Var<T>);        \
  template GeneratorLoss<T> loss_generator(Var<T>, Var<T>, Var<T>, std::optional<Var<T>>,    \
                                           int, const HyperParams&);                         \
  template Var<T> loss_discriminator(Var<T>, Var<T>);

PCADV_INSTANTIATE_LGGAN(float)
PCADV_INSTANTIATE_LGGAN(double)

#undef PCADV_INSTANTIATE_LGGAN

}  // namespace pcadv::lggan
