#include "pcmp/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcmp {

double Bbox::max_edge() const {
  return std::max({max.x - min.x, max.y - min.y, max.z - min.z});
}

static Bbox compute_bbox(const std::vector<Point3>& pts) {
  Bbox b;
  if (pts.empty()) return b;
  constexpr double inf = std::numeric_limits<double>::infinity();
  b.min = {inf, inf, inf};
  b.max = {-inf, -inf, -inf};
  for (const auto& p : pts) {
    b.min.x = std::min(b.min.x, p.x);
    b.min.y = std::min(b.min.y, p.y);
    b.min.z = std::min(b.min.z, p.z);
    b.max.x = std::max(b.max.x, p.x);
    b.max.y = std::max(b.max.y, p.y);
    b.max.z = std::max(b.max.z, p.z);
  }
  return b;
}

PointCloud::PointCloud(std::vector<Point3> points, bool normalized)
    : points_(std::move(points)), normalized_(normalized) {
  for (const auto& p : points_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw ParseError("non-finite coordinate in point cloud");
  }
  bbox_ = compute_bbox(points_);
}

std::pair<PointCloud, NormalizationTransform> normalize(const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyCloud("cannot normalize an empty cloud");

  constexpr double kShrink = 1e-6;
  const Bbox& b = cloud.bbox();
  const double edge = b.max_edge();

  NormalizationTransform t;
  if (edge <= 0.0) {
    // All points identical: park the cloud at the cube center.
    t.offset = {b.min.x - 0.5, b.min.y - 0.5, b.min.z - 0.5};
    t.scale = 1.0;
  } else {
    t.offset = b.min;
    t.scale = 1.0 / (edge * (1.0 + kShrink));
  }

  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud.points()) out.push_back(t.apply(p));
  return {PointCloud(std::move(out), true), t};
}

PointCloud denormalize(const PointCloud& cloud, const NormalizationTransform& t) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const auto& p : cloud.points()) out.push_back(t.invert(p));
  return PointCloud(std::move(out), false);
}

const char* shape_kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kSphereSurface: return "sphere-surface";
    case ShapeKind::kCubeSurface: return "cube-surface";
    case ShapeKind::kPlane: return "plane";
    case ShapeKind::kTorus: return "torus";
    case ShapeKind::kTwoSpheres: return "two-spheres";
    case ShapeKind::kGaussianBlob: return "gaussian-blob";
  }
  return "unknown";
}

ShapeKind shape_kind_from_name(const std::string& name) {
  for (int i = 0; i < kNumShapeKinds; ++i) {
    if (name == shape_kind_name(static_cast<ShapeKind>(i)))
      return static_cast<ShapeKind>(i);
  }
  throw ConfigError("unknown shape kind: " + name);
}

}  // namespace pcmp
