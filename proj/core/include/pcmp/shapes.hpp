#pragma once

#include <cstdint>
#include <vector>

#include "pcmp/point_cloud.hpp"

namespace pcmp {

// Samples n points on the ideal surface of the given kind, then perturbs
// each by isotropic Gaussian noise. Deterministic in (kind, n, seed,
// noise_sigma); label = integer value of kind.
LabeledCloud generate_shape(ShapeKind kind, std::size_t n, std::uint64_t seed,
                            double noise_sigma);

// Round-robin dataset over the first `classes` shape kinds,
// `per_class` clouds each, seeds derived from base_seed.
std::vector<LabeledCloud> generate_dataset(int classes, std::size_t per_class,
                                           std::size_t points_per_cloud,
                                           std::uint64_t base_seed,
                                           double noise_sigma);

}  // namespace pcmp
