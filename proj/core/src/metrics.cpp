#include "pcmp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace pcmp {

namespace {

double sq_dist(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

// Uniform grid over the target cloud's bounding box. Queries expand ring by
// ring until the best candidate provably beats every unvisited cell, so the
// answer equals brute force.
class GridIndex {
 public:
  explicit GridIndex(const PointCloud& cloud) : pts_(cloud.points()) {
    const Bbox& b = cloud.bbox();
    origin_ = b.min;
    const double edge = std::max(b.max_edge(), 1e-12);
    const auto n = static_cast<double>(pts_.size());
    res_ = std::clamp(static_cast<int>(std::ceil(std::cbrt(n / 2.0))), 1, 64);
    cell_ = edge / res_ * (1.0 + 1e-12);
    cells_.resize(static_cast<std::size_t>(res_) * res_ * res_);
    for (std::size_t i = 0; i < pts_.size(); ++i)
      cells_[cell_index(coord(pts_[i]))].push_back(i);
  }

  double nearest_sq(const Point3& q) const {
    const auto c = coord(q);
    double best = std::numeric_limits<double>::infinity();
    const int max_ring = 2 * res_;
    for (int ring = 0; ring <= max_ring; ++ring) {
      // Any point in a cell at Chebyshev distance `ring` is at least
      // (ring-1)*cell_ away once the query cell offset is accounted for.
      if (best < std::numeric_limits<double>::infinity()) {
        const double lower = (ring - 1) * cell_;
        if (lower > 0.0 && lower * lower > best) break;
      }
      scan_ring(q, c, ring, best);
    }
    return best;
  }

 private:
  struct Coord {
    int x, y, z;
  };

  Coord coord(const Point3& p) const {
    auto clampc = [&](double v) {
      return std::clamp(static_cast<int>((v)*1.0), 0, res_ - 1);
    };
    return {clampc((p.x - origin_.x) / cell_), clampc((p.y - origin_.y) / cell_),
            clampc((p.z - origin_.z) / cell_)};
  }

  std::size_t cell_index(const Coord& c) const {
    return (static_cast<std::size_t>(c.x) * res_ + c.y) * res_ + c.z;
  }

  void scan_cell(const Point3& q, int x, int y, int z, double& best) const {
    if (x < 0 || y < 0 || z < 0 || x >= res_ || y >= res_ || z >= res_) return;
    for (const std::size_t i : cells_[cell_index({x, y, z})])
      best = std::min(best, sq_dist(q, pts_[i]));
  }

  void scan_ring(const Point3& q, const Coord& c, int ring, double& best) const {
    if (ring == 0) {
      scan_cell(q, c.x, c.y, c.z, best);
      return;
    }
    for (int dx = -ring; dx <= ring; ++dx) {
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring)
            continue;
          scan_cell(q, c.x + dx, c.y + dy, c.z + dz, best);
        }
      }
    }
  }

  const std::vector<Point3>& pts_;
  Point3 origin_;
  double cell_ = 1.0;
  int res_ = 1;
  std::vector<std::vector<std::size_t>> cells_;
};

double nn_mse_grid(const PointCloud& from, const PointCloud& to) {
  const GridIndex index(to);
  double sum = 0.0;
  for (const auto& p : from.points()) sum += index.nearest_sq(p);
  return sum / static_cast<double>(from.size());
}

}  // namespace

double nn_mse(const PointCloud& from, const PointCloud& to) {
  if (from.empty() || to.empty()) throw EmptyCloud("nn_mse on empty cloud");
  return nn_mse_grid(from, to);
}

PsnrResult d1_psnr(const PointCloud& reference, const PointCloud& reconstructed,
                   double peak) {
  if (peak <= 0.0) throw ConfigError("peak must be > 0");
  PsnrResult r;
  r.peak = peak;
  r.mse = std::max(nn_mse(reference, reconstructed),
                   nn_mse(reconstructed, reference));
  r.d1_psnr = r.mse > 0.0 ? 10.0 * std::log10(peak * peak / r.mse)
                          : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace pcmp
