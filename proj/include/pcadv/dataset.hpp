#pragma once

#include "pcadv/common.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace pcadv::data {

struct PointCloud {
  Points<float> points;
  int label = -1;
};

struct Dataset {
  std::vector<PointCloud> clouds;
  std::string split = "train";
  std::vector<std::string> class_names;
  int num_points = 0;

  int num_classes() const { return int(class_names.size()); }
  std::size_t size() const { return clouds.size(); }
  /// Throws MalformedInput unless every cloud has num_points rows and a
  /// label below num_classes().
  void validate() const;
};

struct SplitDataset {
  Dataset train;
  Dataset test;
};

enum class ShapeKind { sphere, cube, cone, plane, cylinder, torus, pyramid, ellipsoid };

inline constexpr int kMaxToyClasses = 8;
std::string shape_name(ShapeKind kind);

struct ToyConfig {
  int num_classes = 4;
  int num_points = 256;
  int train_per_class = 200;
  int test_per_class = 50;
  double jitter_sigma = 0.01;
  double jitter_clip = 0.02;
};

/// Surface samples of one procedural shape, jittered per coordinate by a
/// clipped Gaussian. Not rotated or normalized. The sphere has radius 0.5.
Points<float> sample_shape(ShapeKind kind, int num_points, double jitter_sigma,
                           double jitter_clip, std::mt19937_64& rng);

/// Procedural stand-in benchmark: class i is ShapeKind(i). Each cloud gets
/// a random rotation about the z axis and is normalized to the unit cube.
/// Labels cycle 0..C-1 so any prefix is class-balanced.
SplitDataset make_toy_dataset(const ToyConfig& config, std::uint64_t seed);

enum class Format { packed, ascii_dir };
Format parse_format(const std::string& name);

/// Packed layout (little endian): "PCAD", version u32, cloud count u32,
/// points per cloud u32, class count u32, then per cloud a u32 label and
/// N x 3 float32 coordinates.
inline constexpr std::uint32_t kPackedVersion = 1;

void save_packed(const Dataset& dataset, const std::filesystem::path& path);
/// ascii-dir layout: one "x y z" line per point in cloud_NNNNN.txt, a
/// labels.txt of "<file> <label>" lines and classes.txt with one name per
/// line.
void save_ascii_dir(const Dataset& dataset, const std::filesystem::path& dir);

/// Loads and normalizes every cloud to the unit cube.
Dataset load_dataset(const std::filesystem::path& path, Format format);

}  // namespace pcadv::data
