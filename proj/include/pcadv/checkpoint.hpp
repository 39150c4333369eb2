#pragma once

// Model persistence. Layout (little endian): "PCCK", version u32, manifest
// length u64, manifest JSON, then each array's float32 values in manifest
// order. The manifest lists every array's name and shape.

#include "pcadv/common.hpp"
#include "pcadv/nn/tape.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace pcadv::io {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedArray {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<float> values;
};

struct Checkpoint {
  /// Free-form description (architecture, hyperparameters, seed). The
  /// "arrays" and "format_version" keys are managed by save/load.
  nlohmann::json manifest = nlohmann::json::object();
  std::vector<NamedArray> arrays;

  /// Arrays whose name starts with `prefix`, prefix stripped.
  Checkpoint section(const std::string& prefix) const;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
/// Throws MalformedInput on a bad magic, unknown version, corrupt manifest
/// or a size that disagrees with the manifest shapes.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Appends every parameter of `model` under `prefix`.
template <typename M>
void store_model(const M& model, Checkpoint& out, const std::string& prefix = "") {
  model.visit([&](const auto& p) {
    NamedArray a{prefix + p.name, p.value.rows(), p.value.cols(), {}};
    a.values.reserve(std::size_t(p.value.size()));
    for (Eigen::Index i = 0; i < p.value.size(); ++i) a.values.push_back(float(p.value.data()[i]));
    out.arrays.push_back(std::move(a));
  });
}

/// Assigns parameters from `prefix`-named arrays, checking names and shapes.
template <typename M>
void restore_model(const Checkpoint& in, M& model, const std::string& prefix = "") {
  std::size_t at = 0;
  std::size_t used = 0;
  model.visit([&](auto& p) {
    while (at < in.arrays.size() && in.arrays[at].name.rfind(prefix, 0) != 0) ++at;
    if (at == in.arrays.size()) throw MalformedInput("checkpoint: missing array " + prefix + p.name);
    const NamedArray& a = in.arrays[at++];
    if (a.name != prefix + p.name || a.rows != p.value.rows() || a.cols != p.value.cols()) {
      throw MalformedInput("checkpoint: array " + a.name + " (" + std::to_string(a.rows) + "x" +
                           std::to_string(a.cols) + ") does not match parameter " + prefix +
                           p.name + " (" + std::to_string(p.value.rows()) + "x" +
                           std::to_string(p.value.cols()) + ")");
    }
    using T = typename std::decay_t<decltype(p.value)>::Scalar;
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = T(a.values[std::size_t(i)]);
    p.zero_grad();
    ++used;
  });
  std::size_t available = 0;
  for (const auto& a : in.arrays) available += a.name.rfind(prefix, 0) == 0;
  if (used != available) {
    throw MalformedInput("checkpoint: " + std::to_string(available - used) +
                         " unused arrays under '" + prefix + "'");
  }
}

}  // namespace pcadv::io
