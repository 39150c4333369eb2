#pragma once

#include "pcadv/dataset.hpp"
#include "pcadv/nn/layers.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace pcadv::victim {

enum class Architecture { pointnet, pointnetpp };
std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& name);

/// One set-abstraction level: `centroids` FPS samples, ball of `radius`
/// holding up to `neighbors` points, shared MLP `widths`.
struct LevelSpec {
  int centroids = 0;
  double radius = 0.0;
  int neighbors = 32;
  std::vector<int> widths;
};

struct VictimConfig {
  Architecture architecture = Architecture::pointnet;
  int num_classes = 4;
  int num_points = 256;
  bool use_tnet = false;
  bool normalize = false;
  double dropout = 0.0;
  // PointNet
  std::vector<int> point_widths{64, 64, 64, 128, 1024};
  std::vector<int> head_widths{512, 256};
  // PointNet++ (reduced single-scale grouping)
  std::vector<LevelSpec> levels{{64, 0.2, 32, {32, 32, 64}}, {16, 0.4, 32, {64, 64, 128}}};
  std::vector<int> global_widths{128, 256};
  std::vector<int> pp_head_widths{128};
};

/// Point cloud classifier H: N x 3 coordinates to 1 x C logits.
template <typename T>
class VictimModel {
 public:
  explicit VictimModel(VictimConfig config);

  const VictimConfig& config() const { return config_; }
  int num_classes() const { return config_.num_classes; }

  /// Records the forward pass on `tape`. `dropout_rng` enables dropout (when
  /// the configured rate is positive); evaluation passes nullptr.
  nn::Var<T> forward(nn::Tape<T>& tape, nn::Var<T> cloud, nn::Trainable trainable,
                     std::mt19937_64* dropout_rng = nullptr);

  Matrix<T> logits(const Points<T>& cloud);
  int predict(const Points<T>& cloud);

  template <typename F> void visit(F&& f) { visit_impl(*this, f); }
  template <typename F> void visit(F&& f) const { visit_impl(*this, f); }

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& self, F& f) {
    if (self.config_.architecture == Architecture::pointnet) {
      if (self.config_.use_tnet) {
        self.tnet_point_.visit(f);
        self.tnet_head_.visit(f);
      }
      self.point_mlp_.visit(f);
      self.head_.visit(f);
    } else {
      for (auto& m : self.level_mlps_) m.visit(f);
      self.global_mlp_.visit(f);
      self.head_.visit(f);
    }
  }

  nn::Var<T> head_forward(nn::Tape<T>& tape, nn::Var<T> x, nn::Trainable trainable,
                          std::mt19937_64* dropout_rng);
  nn::Var<T> pointnet_forward(nn::Tape<T>& tape, nn::Var<T> cloud, nn::Trainable trainable,
                              std::mt19937_64* dropout_rng);
  nn::Var<T> pointnetpp_forward(nn::Tape<T>& tape, nn::Var<T> cloud, nn::Trainable trainable,
                                std::mt19937_64* dropout_rng);

  VictimConfig config_;
  nn::Mlp<T> tnet_point_;
  nn::Mlp<T> tnet_head_;
  nn::Mlp<T> point_mlp_;
  std::vector<nn::Mlp<T>> level_mlps_;
  nn::Mlp<T> global_mlp_;
  nn::Mlp<T> head_;
};

/// Logits of a PointNet victim (shared point MLP, global max pool, dense head).
template <typename T>
Matrix<T> pointnet_forward(VictimModel<T>& model, const Points<T>& cloud);
/// Logits of a PointNet++ victim (set abstraction levels, global level, head).
template <typename T>
Matrix<T> pointnetpp_forward(VictimModel<T>& model, const Points<T>& cloud);

struct InputGradient {
  double loss = 0.0;
  Matrix<double> logits;
  Points<double> gradient;  // N x 3
};

/// Gradient of softmax_cross_entropy(model(cloud), label) with respect to
/// the coordinates.
template <typename T>
InputGradient input_gradient(VictimModel<T>& model, const Points<T>& cloud, int label);

struct TrainConfig {
  int epochs = 20;
  int batch_size = 8;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  // Each training sample is shifted by a uniform offset in [-s, s] per axis.
  double shift_augment = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct TrainedVictim {
  VictimModel<float> model;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<EpochRecord> log;
};

/// Adam training on cross-entropy; deterministic for a fixed seed. Throws
/// Divergence on a non-finite loss.
TrainedVictim train_victim(const data::Dataset& train, const data::Dataset& test,
                           const VictimConfig& model_config, const TrainConfig& config,
                           const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Percentage of clouds predicted as their label.
double accuracy(VictimModel<float>& model, const data::Dataset& dataset);

}  // namespace pcadv::victim
