#pragma once

// Label-guided generative attack: a generator G = (label encoder, point
// encoder, point decoder) that maps (cloud, target label) to an adversarial
// cloud in one pass, and a graph-patch discriminator D trained against it
// with least-squares objectives.

#include "pcadv/attack_result.hpp"
#include "pcadv/dataset.hpp"
#include "pcadv/geometry.hpp"
#include "pcadv/nn/layers.hpp"
#include "pcadv/victim.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pcadv::lggan {

/// A set-abstraction level of the point encoder. It samples
/// N / point_divisor centroids by FPS from the previous level.
struct EncoderLevel {
  int point_divisor = 1;
  double radius = 0.05;
  int neighbors = 32;
  std::vector<int> widths;
};

struct GeneratorConfig {
  int num_classes = 4;
  std::vector<EncoderLevel> levels{{1, 0.05, 32, {32, 32, 64}},
                                   {2, 0.1, 32, {64, 64, 128}},
                                   {4, 0.2, 32, {128, 128, 256}},
                                   {8, 0.3, 32, {256, 256, 512}}};
  /// Width of every level after interpolation and the 1x1 reduction.
  int level_channels = 64;
  /// Label-concatenating decoder layers; a final layer maps to xyz.
  std::vector<int> decoder_widths{256, 128, 64};
  /// false: the label is concatenated before the first decoder layer only.
  bool multi_layer_labels = true;
  /// The output layer predicts a per-point offset added to the input cloud
  /// instead of absolute coordinates.
  bool residual_output = true;
  /// With residual output and a positive bound b, offsets are squashed to
  /// b * tanh(offset / b) per coordinate.
  double max_offset = 0.0;

  /// Width of the aggregated per-point feature fed to the decoder.
  int aggregate_width() const { return int(levels.size()) * level_channels + 3; }
};

struct DiscriminatorConfig {
  std::vector<int> head_widths{32, 64};
  int k = 8;
  int pool_divisor = 4;
  int residual_blocks = 2;
  /// Score every pooled seed patch instead of one global score.
  bool patch_scores = false;
};

/// Where the balance weight alpha multiplies. `experimental`:
/// L = alpha * L_cls + L_rec + beta * L_dis. `equation`:
/// L = L_cls + alpha * L_rec + beta * L_dis.
enum class LossWeighting { experimental, equation };
enum class ReconstructionMode { l2, chamfer };

std::string to_string(LossWeighting w);
LossWeighting parse_weighting(const std::string& s);
std::string to_string(ReconstructionMode m);
ReconstructionMode parse_reconstruction(const std::string& s);

struct HyperParams {
  double alpha = 10.0;
  double beta = 1.0;
  double lr_generator = 1e-3;
  double lr_discriminator = 1e-5;
  int batch_size = 4;
  int epochs = 200;
  int k = 8;
  int levels = 4;
  int decoder_layers = 4;
  int num_classes = 4;
  LossWeighting weighting = LossWeighting::experimental;
  ReconstructionMode reconstruction = ReconstructionMode::l2;
  std::uint64_t seed = 1;
  /// Clouds of the validation slice scored after every epoch.
  int validation_size = 32;
  /// Stop after this many seconds of training (0: no limit).
  double time_budget_seconds = 0.0;

  void validate() const;
};

/// One one-hot 1 x C code per label-concatenating decoder layer. The codes
/// are identical; each is broadcast to every point when concatenated.
template <typename T>
struct LabelCode {
  int target = -1;
  std::vector<Matrix<T>> codes;
};

template <typename T>
LabelCode<T> encode_label(int target, int num_classes, int layers);

template <typename T>
struct PyramidLevel {
  std::vector<int> source_index;  // rows of the input cloud
  nn::Var<T> points;              // n_i x 3
  nn::Var<T> features;            // n_i x c_i
};

template <typename T>
struct FeaturePyramid {
  std::vector<PyramidLevel<T>> levels;
};

template <typename T>
class Generator {
 public:
  explicit Generator(GeneratorConfig config);

  const GeneratorConfig& config() const { return config_; }

  FeaturePyramid<T> encode_points(nn::Tape<T>& tape, nn::Var<T> cloud, nn::Trainable trainable);
  nn::Var<T> decode_points(nn::Tape<T>& tape, const FeaturePyramid<T>& pyramid,
                           const LabelCode<T>& label, nn::Var<T> cloud, nn::Trainable trainable);
  /// decode_points(encode_label(target), encode_points(cloud)).
  nn::Var<T> forward(nn::Tape<T>& tape, nn::Var<T> cloud, int target, nn::Trainable trainable);

  Points<T> generate(const Points<T>& cloud, int target);

  /// Final pointwise layer (decoder width to xyz).
  nn::Dense<T>& output_layer() { return output_; }

  template <typename F> void visit(F&& f) { visit_impl(*this, f); }
  template <typename F> void visit(F&& f) const { visit_impl(*this, f); }

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& self, F& f) {
    for (auto& m : self.encoder_) m.visit(f);
    for (auto& d : self.reducers_) d.visit(f);
    for (auto& d : self.decoder_) d.visit(f);
    self.output_.visit(f);
  }

  GeneratorConfig config_;
  std::vector<nn::Mlp<T>> encoder_;
  std::vector<nn::Dense<T>> reducers_;
  std::vector<nn::Dense<T>> decoder_;
  nn::Dense<T> output_;
};

/// Neighbor lists of every point among `points`, excluding the point itself.
template <typename T>
geometry::NeighborIndex knn_graph(const Points<T>& points, std::size_t k);

/// f_out(x) = f_in(x) w0 + (sum over q in N(x) of f_in(q)) w1. Every
/// vertex must have the same neighbor count.
template <typename T>
nn::Var<T> graph_conv(nn::Var<T> w0, nn::Var<T> w1, const geometry::NeighborIndex& graph,
                      nn::Var<T> features);

/// Two graph convolutions with a ReLU between them plus an identity skip.
template <typename T>
struct ResidualGraphBlock {
  nn::Parameter<T> w0a, w1a, w0b, w1b;

  ResidualGraphBlock() = default;
  ResidualGraphBlock(const std::string& name, Eigen::Index width);

  nn::Var<T> forward(nn::Tape<T>& tape, const geometry::NeighborIndex& graph,
                     nn::Var<T> features, nn::Trainable trainable);

  template <typename F> void visit(F&& f) { f(w0a); f(w1a); f(w0b); f(w1b); }
  template <typename F> void visit(F&& f) const { f(w0a); f(w1a); f(w0b); f(w1b); }
};

template <typename T>
class Discriminator {
 public:
  explicit Discriminator(DiscriminatorConfig config);

  const DiscriminatorConfig& config() const { return config_; }

  /// P x 1 scores: P = 1 in global mode, one per pooled seed in patch mode.
  nn::Var<T> forward(nn::Tape<T>& tape, nn::Var<T> cloud, nn::Trainable trainable);
  /// Mean score.
  double score(const Points<T>& cloud);

  /// Indexed block access for tests.
  ResidualGraphBlock<T>& block(std::size_t i) { return blocks_[i]; }
  std::size_t block_count() const { return blocks_.size(); }

  template <typename F> void visit(F&& f) { visit_impl(*this, f); }
  template <typename F> void visit(F&& f) const { visit_impl(*this, f); }

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& self, F& f) {
    self.head_.visit(f);
    for (auto& b : self.blocks_) b.visit(f);
    self.output_.visit(f);
  }

  DiscriminatorConfig config_;
  nn::Mlp<T> head_;
  std::vector<ResidualGraphBlock<T>> blocks_;
  nn::Dense<T> output_;
};

/// Fan-in initialization with the output layer scaled by `output_scale`,
/// so a residual generator starts near the identity map.
template <typename T>
void initialize_generator(Generator<T>& gen, std::uint64_t seed, double output_scale = 0.01);

/// Fan-in initialization, with each residual block's first convolution
/// scaled by 1/sqrt(k + 1) for the neighbor sum and its second convolution
/// zeroed, so every block starts as the identity map.
template <typename T>
void initialize_discriminator(Discriminator<T>& disc, std::uint64_t seed);

template <typename T>
struct GeneratorLoss {
  nn::Var<T> total;
  double classification = 0.0;
  double reconstruction = 0.0;
  double discriminative = 0.0;
};

/// Weighted sum of cross-entropy towards `target`, reconstruction and the
/// least-squares adversarial term mean((1 - D(adv))^2). `d_score` may be
/// empty when beta is zero.
template <typename T>
GeneratorLoss<T> loss_generator(nn::Var<T> logits, nn::Var<T> adversarial, nn::Var<T> clean,
                                std::optional<nn::Var<T>> d_score, int target,
                                const HyperParams& hp);

/// 1/2 mean(D(fake)^2) + 1/2 mean((1 - D(real))^2).
template <typename T>
nn::Var<T> loss_discriminator(nn::Var<T> score_real, nn::Var<T> score_fake);

struct EpochLog {
  int epoch = 0;
  double classification = 0.0;
  double reconstruction = 0.0;
  double discriminative = 0.0;
  double discriminator = 0.0;
  double success_rate = 0.0;  // % of validation clouds hitting their target
  double validation_chamfer = 0.0;
  double seconds = 0.0;
};

struct TrainedLggan {
  Generator<float> generator;
  Discriminator<float> discriminator;
  std::vector<EpochLog> log;
  /// Set when a non-finite loss stopped training; the parameters are the
  /// last finite epoch's.
  std::optional<std::string> divergence;
};

/// Alternating least-squares GAN training against a frozen victim: per
/// minibatch one discriminator Adam step, then one generator Adam step.
/// Targets are drawn uniformly from the classes other than the label.
TrainedLggan train_lggan(victim::VictimModel<float>& victim, const data::Dataset& train,
                         const data::Dataset& validation, const GeneratorConfig& gen_config,
                         const DiscriminatorConfig& disc_config, const HyperParams& hp,
                         const std::function<void(const EpochLog&)>& on_epoch = {});

/// Continues training existing networks (used by train_lggan).
void train_lggan_into(TrainedLggan& state, victim::VictimModel<float>& victim,
                      const data::Dataset& train, const data::Dataset& validation,
                      const HyperParams& hp,
                      const std::function<void(const EpochLog&)>& on_epoch = {});

/// Uniform draw from [0, C) excluding `truth`.
int sample_target(int truth, int num_classes, std::mt19937_64& rng);

/// Percentage of `clouds` the generator pushes to their targets.
double targeted_success_rate(Generator<float>& generator, victim::VictimModel<float>& victim,
                             const data::Dataset& clouds, std::span<const int> targets);

/// One generator pass, then one victim pass for the prediction.
AttackResult attack_lggan(Generator<float>& generator, victim::VictimModel<float>& victim,
                          const Points<float>& cloud, int target);

}  // namespace pcadv::lggan
