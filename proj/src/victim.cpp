#include "pcadv/victim.hpp"

#include "pcadv/geometry.hpp"
#include "pcadv/nn/adam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pcadv::victim {

using nn::Tape;
using nn::Trainable;
using nn::Var;

std::string to_string(Architecture arch) {
  return arch == Architecture::pointnet ? "pointnet" : "pointnetpp";
}

Architecture parse_architecture(const std::string& name) {
  if (name == "pointnet") return Architecture::pointnet;
  if (name == "pointnetpp" || name == "pointnet++") return Architecture::pointnetpp;
  throw InvalidArgument("unknown victim architecture '" + name + "'");
}

template <typename T>
VictimModel<T>::VictimModel(VictimConfig config) : config_(std::move(config)) {
  if (config_.num_classes < 2) throw InvalidArgument("victim: need at least 2 classes");
  std::vector<int> head = config_.architecture == Architecture::pointnet
                              ? config_.head_widths
                              : config_.pp_head_widths;
  head.push_back(config_.num_classes);
  if (config_.architecture == Architecture::pointnet) {
    if (config_.use_tnet) {
      const int tp[] = {64, 128, 1024};
      const int th[] = {512, 256, 9};
      tnet_point_ = nn::Mlp<T>("tnet.point", 3, tp, false, config_.normalize);
      tnet_head_ = nn::Mlp<T>("tnet.head", 1024, th, true);
    }
    point_mlp_ = nn::Mlp<T>("point", 3, config_.point_widths, false, config_.normalize);
    head_ = nn::Mlp<T>("head", point_mlp_.out(), head, true);
  } else {
    Eigen::Index channels = 0;
    for (std::size_t i = 0; i < config_.levels.size(); ++i) {
      const LevelSpec& level = config_.levels[i];
      if (level.centroids < 1 || !(level.radius > 0) || level.neighbors < 1 ||
          level.widths.empty()) {
        throw InvalidArgument("victim: malformed set-abstraction level " + std::to_string(i));
      }
      level_mlps_.emplace_back("sa" + std::to_string(i), 3 + channels, level.widths, false,
                               config_.normalize);
      channels = level.widths.back();
    }
    global_mlp_ = nn::Mlp<T>("global", 3 + channels, config_.global_widths, false,
                             config_.normalize);
    head_ = nn::Mlp<T>("head", global_mlp_.out(), head, true);
  }
}

template <typename T>
Var<T> VictimModel<T>::head_forward(Tape<T>& tape, Var<T> x, Trainable trainable,
                                    std::mt19937_64* dropout_rng) {
  for (std::size_t i = 0; i < head_.layers.size(); ++i) {
    x = head_.layers[i].forward(tape, x, trainable);
    if (i + 1 < head_.layers.size()) {
      x = nn::relu(x);
      if (dropout_rng) x = nn::dropout(x, config_.dropout, *dropout_rng);
    }
  }
  return x;
}

template <typename T>
Var<T> VictimModel<T>::pointnet_forward(Tape<T>& tape, Var<T> cloud, Trainable trainable,
                                        std::mt19937_64* dropout_rng) {
  Var<T> x = cloud;
  if (config_.use_tnet) {
    Var<T> t = nn::max_pool_group(nn::pointwise_mlp(tape, cloud, tnet_point_, trainable),
                                  cloud.rows());
    t = nn::reshape(tnet_head_.forward(tape, t, trainable), 3, 3);
    t = nn::add(t, tape.constant(Matrix<T>::Identity(3, 3)));
    x = nn::matmul(cloud, t);
  }
  Var<T> features = nn::pointwise_mlp(tape, x, point_mlp_, trainable);
  Var<T> global = nn::max_pool_group(features, features.rows());
  return head_forward(tape, global, trainable, dropout_rng);
}

template <typename T>
Var<T> VictimModel<T>::pointnetpp_forward(Tape<T>& tape, Var<T> cloud, Trainable trainable,
                                          std::mt19937_64* dropout_rng) {
  Var<T> xyz = cloud;
  Var<T> features;
  bool has_features = false;
  for (std::size_t i = 0; i < config_.levels.size(); ++i) {
    const LevelSpec& level = config_.levels[i];
    const Points<T>& pts = xyz.value();
    const auto m = std::min<std::size_t>(std::size_t(level.centroids), std::size_t(pts.rows()));
    const auto picked = geometry::farthest_point_sample(pts, m, geometry::canonical_seed(pts));
    Var<T> centroids = nn::gather_rows(xyz, picked);
    const auto groups =
        geometry::ball_query(centroids.value(), pts, level.radius, std::size_t(level.neighbors))
            .padded(std::size_t(level.neighbors));
    std::vector<int> owner(groups.size());
    for (std::size_t j = 0; j < owner.size(); ++j) owner[j] = int(j / std::size_t(level.neighbors));
    Var<T> local = nn::sub(nn::gather_rows(xyz, groups), nn::gather_rows(centroids, owner));
    if (has_features) {
      const Var<T> parts[] = {local, nn::gather_rows(features, groups)};
      local = nn::concat_cols<T>(parts);
    }
    features = nn::max_pool_group(nn::pointwise_mlp(tape, local, level_mlps_[i], trainable),
                                  level.neighbors);
    xyz = centroids;
    has_features = true;
  }
  Var<T> global_in = xyz;
  if (has_features) {
    const Var<T> parts[] = {xyz, features};
    global_in = nn::concat_cols<T>(parts);
  }
  Var<T> global = nn::pointwise_mlp(tape, global_in, global_mlp_, trainable);
  global = nn::max_pool_group(global, global.rows());
  return head_forward(tape, global, trainable, dropout_rng);
}

template <typename T>
Var<T> VictimModel<T>::forward(Tape<T>& tape, Var<T> cloud, Trainable trainable,
                               std::mt19937_64* dropout_rng) {
  if (cloud.cols() != 3 || cloud.rows() < 1) {
    throw InvalidArgument("victim: expected a non-empty N x 3 cloud");
  }
  return config_.architecture == Architecture::pointnet
             ? pointnet_forward(tape, cloud, trainable, dropout_rng)
             : pointnetpp_forward(tape, cloud, trainable, dropout_rng);
}

template <typename T>
Matrix<T> VictimModel<T>::logits(const Points<T>& cloud) {
  Tape<T> tape;
  return forward(tape, tape.constant_ref(cloud), Trainable::no).value();
}

template <typename T>
int VictimModel<T>::predict(const Points<T>& cloud) {
  Eigen::Index best = 0;
  logits(cloud).row(0).maxCoeff(&best);
  return int(best);
}

template <typename T>
Matrix<T> pointnet_forward(VictimModel<T>& model, const Points<T>& cloud) {
  if (model.config().architecture != Architecture::pointnet) {
    throw InvalidArgument("pointnet_forward: model is not a PointNet");
  }
  return model.logits(cloud);
}

template <typename T>
Matrix<T> pointnetpp_forward(VictimModel<T>& model, const Points<T>& cloud) {
  if (model.config().architecture != Architecture::pointnetpp) {
    throw InvalidArgument("pointnetpp_forward: model is not a PointNet++");
  }
  return model.logits(cloud);
}

template <typename T>
InputGradient input_gradient(VictimModel<T>& model, const Points<T>& cloud, int label) {
  Tape<T> tape;
  Var<T> x = tape.input(cloud);
  Var<T> logits = model.forward(tape, x, Trainable::no);
  Var<T> loss = nn::softmax_cross_entropy(logits, label);
  tape.backward(loss);
  InputGradient out;
  out.loss = double(loss.item());
  out.logits = logits.value().template cast<double>();
  out.gradient = x.grad().size() ? Points<double>(x.grad().template cast<double>())
                                 : Points<double>::Zero(cloud.rows(), 3);
  return out;
}

double accuracy(VictimModel<float>& model, const data::Dataset& dataset) {
  if (dataset.clouds.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& c : dataset.clouds) correct += model.predict(c.points) == c.label;
  return 100.0 * double(correct) / double(dataset.clouds.size());
}

TrainedVictim train_victim(const data::Dataset& train, const data::Dataset& test,
                           const VictimConfig& model_config, const TrainConfig& config,
                           const std::function<void(const EpochRecord&)>& on_epoch) {
  if (train.num_classes() != model_config.num_classes) {
    throw InvalidArgument("train_victim: dataset has " + std::to_string(train.num_classes()) +
                          " classes, model expects " + std::to_string(model_config.num_classes));
  }
  if (train.clouds.empty()) throw InvalidArgument("train_victim: empty training set");
  if (config.batch_size < 1 || config.epochs < 0) {
    throw InvalidArgument("train_victim: batch size must be >= 1 and epochs >= 0");
  }
  if (!(config.shift_augment >= 0.0) || !std::isfinite(config.shift_augment)) {
    throw InvalidArgument("train_victim: shift_augment must be finite and >= 0");
  }
  TrainedVictim out{VictimModel<float>(model_config), 0.0, 0.0, {}};
  nn::initialize(out.model, config.seed);
  nn::Adam<float> adam({config.learning_rate});
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order(train.clouds.size());
  std::iota(order.begin(), order.end(), 0);
  const bool use_dropout = model_config.dropout > 0.0;
  std::mt19937_64 shift_rng(config.seed ^ 0x5851f42d4c957f2dull);
  std::uniform_real_distribution<double> shift(-config.shift_augment, config.shift_augment);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += std::size_t(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + std::size_t(config.batch_size));
      const float inv = 1.0f / float(stop - start);
      nn::zero_grad(out.model);
      for (std::size_t b = start; b < stop; ++b) {
        const auto& sample = train.clouds[order[b]];
        Tape<float> tape;
        Points<float> shifted;
        if (config.shift_augment > 0.0) {
          Eigen::Matrix<float, 1, 3> offset;
          for (int c = 0; c < 3; ++c) offset(c) = float(shift(shift_rng));
          shifted = sample.points.rowwise() + offset;
        }
        const Points<float>& input = config.shift_augment > 0.0 ? shifted : sample.points;
        Var<float> logits = out.model.forward(tape, tape.constant_ref(input),
                                              Trainable::yes, use_dropout ? &rng : nullptr);
        Var<float> loss = nn::softmax_cross_entropy(logits, sample.label);
        if (!std::isfinite(loss.item())) {
          throw Divergence("train_victim: non-finite loss at epoch " + std::to_string(epoch));
        }
        loss_sum += loss.item();
        Eigen::Index pred = 0;
        logits.value().row(0).maxCoeff(&pred);
        correct += pred == sample.label;
        tape.backward(nn::scale(loss, inv));
      }
      adam.step(out.model);
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.loss = loss_sum / double(order.size());
    rec.train_accuracy = 100.0 * double(correct) / double(order.size());
    rec.test_accuracy = accuracy(out.model, test);
    out.log.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  out.train_accuracy = accuracy(out.model, train);
  out.test_accuracy = accuracy(out.model, test);
  return out;
}

template class VictimModel<float>;
template class VictimModel<double>;
template Matrix<float> pointnet_forward(VictimModel<float>&, const Points<float>&);
template Matrix<double> pointnet_forward(VictimModel<double>&, const Points<double>&);
template Matrix<float> pointnetpp_forward(VictimModel<float>&, const Points<float>&);
template Matrix<double> pointnetpp_forward(VictimModel<double>&, const Points<double>&);
template InputGradient input_gradient(VictimModel<float>&, const Points<float>&, int);
template InputGradient input_gradient(VictimModel<double>&, const Points<double>&, int);

}  // namespace pcadv::victim
