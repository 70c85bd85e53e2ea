#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pcmp/cloud_io.hpp"
#include "pcmp/shapes.hpp"

using namespace pcmp;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("xyz loader reads points in file order") {
  const std::string path = temp_path("pcmp_test.xyz");
  write_file(path, "0 0 0\n1 0 0\n0 1 0\n");
  const PointCloud c = load_cloud(path, CloudFormat::kXyz);
  REQUIRE(c.size() == 3);
  CHECK(c.points()[1] == Point3{1, 0, 0});
  CHECK(c.bbox().min == Point3{0, 0, 0});
  CHECK(c.bbox().max == Point3{1, 1, 0});
  CHECK_FALSE(c.normalized());
}

TEST_CASE("ply ascii loader") {
  const std::string path = temp_path("pcmp_test.ply");
  write_file(path,
             "ply\nformat ascii 1.0\nelement vertex 1\n"
             "property float x\nproperty float y\nproperty float z\n"
             "end_header\n0.5 0.5 0.5\n");
  const PointCloud c = load_cloud(path, CloudFormat::kPlyAscii);
  REQUIRE(c.size() == 1);
  CHECK(c.points()[0] == Point3{0.5, 0.5, 0.5});
}

TEST_CASE("malformed inputs raise ParseError") {
  const std::string path = temp_path("pcmp_bad.xyz");
  write_file(path, "a b c\n");
  CHECK_THROWS_AS(load_cloud(path, CloudFormat::kXyz), ParseError);
  write_file(path, "1 2\n");
  CHECK_THROWS_AS(load_cloud(path, CloudFormat::kXyz), ParseError);
  write_file(path, "");
  CHECK_THROWS_AS(load_cloud(path, CloudFormat::kXyz), EmptyCloud);
  write_file(path, "ply\nformat binary_little_endian 1.0\n");
  CHECK_THROWS_AS(load_cloud(path, CloudFormat::kPlyAscii), ParseError);
}

TEST_CASE("writer output reloads identically") {
  const LabeledCloud sample = generate_shape(ShapeKind::kTorus, 200, 11, 0.05);
  for (const CloudFormat fmt : {CloudFormat::kXyz, CloudFormat::kPlyAscii}) {
    const std::string path =
        temp_path(fmt == CloudFormat::kXyz ? "pcmp_rt.xyz" : "pcmp_rt.ply");
    save_cloud(sample.cloud, path, fmt);
    const PointCloud back = load_cloud(path, fmt);
    CHECK(back.points() == sample.cloud.points());
  }
}

TEST_CASE("normalize maps into the unit cube and inverts") {
  const PointCloud c({{0, 0, 0}, {2, 0, 0}});
  const auto [norm, t] = normalize(c);
  CHECK(norm.points()[0] == Point3{0, 0, 0});
  CHECK(norm.points()[1].x == doctest::Approx(0.999999).epsilon(1e-8));
  CHECK(t.scale == doctest::Approx(0.5).epsilon(1e-5));

  const PointCloud back = denormalize(norm, t);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(back.points()[i].x == doctest::Approx(c.points()[i].x).epsilon(1e-6));
    CHECK(back.points()[i].y == doctest::Approx(c.points()[i].y).epsilon(1e-6));
  }
}

TEST_CASE("already-normalized cloud only shrinks by epsilon") {
  const PointCloud c({{0, 0, 0}, {0.999999, 0.5, 0.25}});
  const auto [norm, t] = normalize(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(norm.points()[i].x ==
          doctest::Approx(c.points()[i].x).epsilon(1e-4));
  }
}

TEST_CASE("degenerate cloud normalizes to the cube center") {
  const PointCloud c({{5, 5, 5}, {5, 5, 5}});
  const auto [norm, t] = normalize(c);
  CHECK(norm.points()[0] == Point3{0.5, 0.5, 0.5});
  CHECK(t.scale == 1.0);
  CHECK(denormalize(norm, t).points()[0] == Point3{5, 5, 5});
}

TEST_CASE("normalize round trip on every generated shape") {
  for (int kind = 0; kind < kNumShapeKinds; ++kind) {
    const LabeledCloud s =
        generate_shape(static_cast<ShapeKind>(kind), 256, 42 + kind, 0.03);
    const auto [norm, t] = normalize(s.cloud);
    for (const auto& p : norm.points()) {
      CHECK(p.x >= 0.0);
      CHECK(p.x < 1.0);
      CHECK(p.y >= 0.0);
      CHECK(p.y < 1.0);
      CHECK(p.z >= 0.0);
      CHECK(p.z < 1.0);
    }
    const PointCloud back = denormalize(norm, t);
    for (std::size_t i = 0; i < back.size(); ++i) {
      const Point3& a = s.cloud.points()[i];
      const Point3& b = back.points()[i];
      CHECK(std::abs(a.x - b.x) <= 1e-6 * std::max(1.0, std::abs(a.x)));
      CHECK(std::abs(a.y - b.y) <= 1e-6 * std::max(1.0, std::abs(a.y)));
      CHECK(std::abs(a.z - b.z) <= 1e-6 * std::max(1.0, std::abs(a.z)));
    }
  }
}

TEST_CASE("sphere samples lie on the sphere when noiseless") {
  const LabeledCloud s = generate_shape(ShapeKind::kSphereSurface, 1024, 7, 0.0);
  REQUIRE(s.cloud.size() == 1024);
  for (const auto& p : s.cloud.points()) {
    const double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    CHECK(r == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("generation is deterministic") {
  const LabeledCloud a = generate_shape(ShapeKind::kTwoSpheres, 512, 3, 0.01);
  const LabeledCloud b = generate_shape(ShapeKind::kTwoSpheres, 512, 3, 0.01);
  CHECK(a.cloud.points() == b.cloud.points());
  const LabeledCloud c = generate_shape(ShapeKind::kTwoSpheres, 512, 4, 0.01);
  CHECK(a.cloud.points() != c.cloud.points());
}

TEST_CASE("plane stays planar through normalization") {
  const LabeledCloud s = generate_shape(ShapeKind::kPlane, 512, 3, 0.0);
  const auto [norm, t] = normalize(s.cloud);
  const double z0 = norm.points()[0].z;
  for (const auto& p : norm.points()) CHECK(p.z == doctest::Approx(z0));
}

TEST_CASE("labels match shape kinds") {
  for (int kind = 0; kind < kNumShapeKinds; ++kind) {
    const auto s = generate_shape(static_cast<ShapeKind>(kind), 64, 1, 0.0);
    CHECK(s.label == kind);
  }
  CHECK_THROWS_AS(generate_shape(ShapeKind::kPlane, 4, 1, 0.0), ConfigError);
  CHECK_THROWS_AS(generate_shape(ShapeKind::kPlane, 64, 1, -0.1), ConfigError);
}
