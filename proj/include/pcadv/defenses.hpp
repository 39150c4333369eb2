#pragma once

// Input-purification defenses. Each returns a new cloud that is a subset or
// a rigid translation of its input.

#include "pcadv/common.hpp"

#include <cstdint>
#include <vector>

namespace pcadv::defenses {

/// Keeps ceil(N * (1 - drop_ratio)) points chosen by a seeded Fisher-Yates
/// shuffle, in shuffled order.
Points<float> srs_defense(const Points<float>& cloud, double drop_ratio, std::uint64_t seed);

/// Rows kept by srs_defense.
std::vector<int> srs_indices(std::size_t n, double drop_ratio, std::uint64_t seed);

/// Statistical outlier removal: drops points whose mean distance to their k
/// nearest other points exceeds mu + alpha * sigma of those means.
Points<float> sor_defense(const Points<float>& cloud, int k, double alpha);

/// Rows kept by sor_defense, ascending.
std::vector<int> sor_indices(const Points<float>& cloud, int k, double alpha);

/// Subtracts the centroid.
Points<float> recenter_defense(const Points<float>& cloud);

}  // namespace pcadv::defenses
