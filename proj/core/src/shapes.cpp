#include "pcmp/shapes.hpp"

#include <cmath>

#include "pcmp/rng.hpp"

namespace pcmp {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

Point3 sphere_point(Rng& rng, double radius, const Point3& center) {
  // Uniform on the sphere via z + azimuth.
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, kTau);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {center.x + radius * r * std::cos(phi),
          center.y + radius * r * std::sin(phi), center.z + radius * z};
}

Point3 cube_surface_point(Rng& rng) {
  // Pick one of six unit faces of [-1,1]^3.
  const int face = static_cast<int>(rng.below(6));
  const double u = rng.uniform(-1.0, 1.0);
  const double v = rng.uniform(-1.0, 1.0);
  const double s = (face & 1) ? 1.0 : -1.0;
  switch (face >> 1) {
    case 0: return {s, u, v};
    case 1: return {u, s, v};
    default: return {u, v, s};
  }
}

Point3 torus_point(Rng& rng) {
  constexpr double kMajor = 1.0;
  constexpr double kMinor = 0.35;
  // Rejection on the major angle density keeps the sampling area-uniform.
  for (;;) {
    const double theta = rng.uniform(0.0, kTau);
    const double phi = rng.uniform(0.0, kTau);
    const double w = (kMajor + kMinor * std::cos(phi)) / (kMajor + kMinor);
    if (rng.uniform() > w) continue;
    const double rad = kMajor + kMinor * std::cos(phi);
    return {rad * std::cos(theta), rad * std::sin(theta),
            kMinor * std::sin(phi)};
  }
}

}  // namespace

LabeledCloud generate_shape(ShapeKind kind, std::size_t n, std::uint64_t seed,
                            double noise_sigma) {
  if (n < 8) throw ConfigError("generate_shape requires n >= 8");
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");

  // Seed mixes all arguments so distinct configurations do not share streams.
  Rng rng(seed * 0x100000001B3ull + static_cast<std::uint64_t>(kind) * 977 +
          n * 31 + 0x9E37);

  std::vector<Point3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point3 p;
    switch (kind) {
      case ShapeKind::kSphereSurface:
        p = sphere_point(rng, 1.0, {0, 0, 0});
        break;
      case ShapeKind::kCubeSurface:
        p = cube_surface_point(rng);
        break;
      case ShapeKind::kPlane:
        p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0};
        break;
      case ShapeKind::kTorus:
        p = torus_point(rng);
        break;
      case ShapeKind::kTwoSpheres: {
        const double cx = (rng.below(2) == 0) ? -0.8 : 0.8;
        p = sphere_point(rng, 0.5, {cx, 0, 0});
        break;
      }
      case ShapeKind::kGaussianBlob:
        p = {0.5 * rng.gaussian(), 0.5 * rng.gaussian(), 0.5 * rng.gaussian()};
        break;
    }
    if (noise_sigma > 0.0) {
      p.x += noise_sigma * rng.gaussian();
      p.y += noise_sigma * rng.gaussian();
      p.z += noise_sigma * rng.gaussian();
    }
    pts.push_back(p);
  }

  LabeledCloud out;
  out.cloud = PointCloud(std::move(pts), false);
  out.label = static_cast<int>(kind);
  out.shape_params = {kind, seed, noise_sigma};
  return out;
}

std::vector<LabeledCloud> generate_dataset(int classes, std::size_t per_class,
                                           std::size_t points_per_cloud,
                                           std::uint64_t base_seed,
                                           double noise_sigma) {
  if (classes < 1 || classes > kNumShapeKinds)
    throw ConfigError("classes must be in [1, 6]");
  std::vector<LabeledCloud> out;
  out.reserve(classes * per_class);
  for (std::size_t i = 0; i < per_class; ++i) {
    for (int c = 0; c < classes; ++c) {
      out.push_back(generate_shape(static_cast<ShapeKind>(c), points_per_cloud,
                                   base_seed + i * 1000003ull + c,
                                   noise_sigma));
    }
  }
  return out;
}

}  // namespace pcmp
