#pragma once

#include <limits>

#include "pcmp/point_cloud.hpp"

namespace pcmp {

struct PsnrResult {
  double d1_psnr = 0.0;  // +inf when mse == 0
  double mse = 0.0;      // max of the two directional mean squared distances
  double peak = 0.0;

  bool lossless() const { return mse == 0.0; }
};

// Symmetric point-to-point quality: mse = max(mse(A->B), mse(B->A)) with
// nearest-neighbor squared distances, psnr = 10*log10(peak^2/mse).
// Uses a uniform-grid accelerator; results match brute force exactly.
PsnrResult d1_psnr(const PointCloud& reference, const PointCloud& reconstructed,
                   double peak);

// Mean over a of the squared distance to the nearest b.
double nn_mse(const PointCloud& from, const PointCloud& to);

}  // namespace pcmp
