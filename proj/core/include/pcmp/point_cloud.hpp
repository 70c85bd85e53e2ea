#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pcmp/errors.hpp"

namespace pcmp {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

struct Bbox {
  Point3 min;
  Point3 max;

  double max_edge() const;

  friend bool operator==(const Bbox&, const Bbox&) = default;
};

class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> points, bool normalized = false);

  const std::vector<Point3>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  bool normalized() const { return normalized_; }
  const Bbox& bbox() const { return bbox_; }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::vector<Point3> points_;
  Bbox bbox_;
  bool normalized_ = false;
};

// Uniform scale + translation mapping raw coordinates into [0,1)^3.
struct NormalizationTransform {
  Point3 offset;       // subtracted before scaling
  double scale = 1.0;  // uniform, > 0

  Point3 apply(const Point3& p) const {
    return {(p.x - offset.x) * scale, (p.y - offset.y) * scale,
            (p.z - offset.z) * scale};
  }
  Point3 invert(const Point3& p) const {
    return {p.x / scale + offset.x, p.y / scale + offset.y,
            p.z / scale + offset.z};
  }

  friend bool operator==(const NormalizationTransform&,
                         const NormalizationTransform&) = default;
};

// Scale by 1/(max_edge*(1+eps)) so every coordinate lands strictly below 1.
// A degenerate cloud (all points identical) maps to (0.5,0.5,0.5) at scale 1.
std::pair<PointCloud, NormalizationTransform> normalize(const PointCloud& cloud);

PointCloud denormalize(const PointCloud& cloud, const NormalizationTransform& t);

enum class ShapeKind : int {
  kSphereSurface = 0,
  kCubeSurface = 1,
  kPlane = 2,
  kTorus = 3,
  kTwoSpheres = 4,
  kGaussianBlob = 5,
};

inline constexpr int kNumShapeKinds = 6;

const char* shape_kind_name(ShapeKind kind);
ShapeKind shape_kind_from_name(const std::string& name);

struct ShapeParams {
  ShapeKind kind = ShapeKind::kSphereSurface;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
};

struct LabeledCloud {
  PointCloud cloud;
  int label = 0;
  ShapeParams shape_params;
};

}  // namespace pcmp
