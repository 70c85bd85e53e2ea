#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "pcmp/octree.hpp"
#include "pcmp/shapes.hpp"

using namespace pcmp;

TEST_CASE("single point in octant 0") {
  const PointCloud c({{0.1, 0.1, 0.1}}, true);
  const Octree t = build_octree(c, 1);
  REQUIRE(t.levels.size() == 1);
  CHECK(t.levels[0] == std::vector<std::uint8_t>{0x01});
  CHECK(t.point_count == 1);
}

TEST_CASE("x bit is the high octant bit") {
  const PointCloud c({{0.9, 0.1, 0.1}}, true);
  const Octree t = build_octree(c, 1);
  CHECK(t.levels[0] == std::vector<std::uint8_t>{0x10});
}

TEST_CASE("all octants occupied") {
  std::vector<Point3> pts;
  for (int i = 0; i < 8; ++i)
    pts.push_back({0.25 + 0.5 * ((i >> 2) & 1), 0.25 + 0.5 * ((i >> 1) & 1),
                   0.25 + 0.5 * (i & 1)});
  const Octree t = build_octree(PointCloud(pts, true), 1);
  CHECK(t.levels[0] == std::vector<std::uint8_t>{0xFF});
}

TEST_CASE("recursing into the same octant") {
  // Hand trace: (0.1,0.1,0.1) -> octant 0 at level 1; within that cube the
  // coordinates become 0.2 < 0.5, so octant 0 again at level 2.
  const PointCloud c({{0.1, 0.1, 0.1}}, true);
  const Octree t = build_octree(c, 2);
  CHECK(t.levels == std::vector<std::vector<std::uint8_t>>{{0x01}, {0x01}});
}

TEST_CASE("unnormalized input is rejected") {
  CHECK_THROWS_AS(build_octree(PointCloud({{1.5, 0, 0}}, true), 3),
                  NotNormalized);
  CHECK_THROWS_AS(build_octree(PointCloud({{-0.1, 0, 0}}, true), 3),
                  NotNormalized);
  CHECK_THROWS_AS(build_octree(PointCloud({{0.5, 0.5, 0.5}}, true), 0),
                  ConfigError);
}

TEST_CASE("reconstruct returns cube centers") {
  const PointCloud c({{0.1, 0.1, 0.1}}, true);
  const Octree t = build_octree(c, 1);
  const PointCloud r = reconstruct(t, 1);
  REQUIRE(r.size() == 1);
  CHECK(r.points()[0] == Point3{0.25, 0.25, 0.25});
}

TEST_CASE("reconstruct full corner cloud at depth 1") {
  std::vector<Point3> pts;
  for (int i = 0; i < 8; ++i)
    pts.push_back({0.1 + 0.8 * ((i >> 2) & 1), 0.1 + 0.8 * ((i >> 1) & 1),
                   0.1 + 0.8 * (i & 1)});
  const Octree t = build_octree(PointCloud(pts, true), 1);
  const PointCloud r = reconstruct(t, 1);
  REQUIRE(r.size() == 8);
  for (const auto& p : r.points()) {
    CHECK((p.x == 0.25 || p.x == 0.75));
    CHECK((p.y == 0.25 || p.y == 0.75));
    CHECK((p.z == 0.25 || p.z == 0.75));
  }
}

namespace {

Octree random_tree(int kind, int depth, std::size_t n, std::uint64_t seed,
                   PointCloud* norm_out = nullptr) {
  const auto s = generate_shape(static_cast<ShapeKind>(kind), n, seed, 0.02);
  auto [norm, t] = normalize(s.cloud);
  if (norm_out) *norm_out = norm;
  return build_octree(norm, depth);
}

}  // namespace

TEST_CASE("level sizes follow parent popcounts") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Octree t = random_tree(static_cast<int>(seed % 6), 6, 300, seed);
    REQUIRE(t.levels[0].size() == 1);
    for (int l = 0; l + 1 < t.max_depth; ++l) {
      std::size_t expected = 0;
      for (const auto b : t.levels[l]) {
        CHECK(b != 0);
        expected += std::popcount(b);
      }
      CHECK(t.levels[l + 1].size() == expected);
    }
  }
}

TEST_CASE("prefix property: deep build truncates to shallow build") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    PointCloud norm;
    const Octree deep = random_tree(static_cast<int>(seed % 6), 6, 400, seed, &norm);
    for (int k = 1; k <= 6; ++k) {
      const Octree shallow = build_octree(norm, k);
      CHECK(truncate(deep, k) == shallow);
    }
  }
}

TEST_CASE("truncate at max depth is the identity") {
  const Octree t = random_tree(3, 5, 200, 9);
  CHECK(truncate(t, 5) == t);
  CHECK_THROWS_AS(truncate(t, 6), DepthOutOfRange);
}

TEST_CASE("reconstruct of a truncated tree matches prefix reconstruct") {
  const Octree t = random_tree(4, 6, 350, 21);
  for (int k = 1; k <= 6; ++k)
    CHECK(reconstruct(truncate(t, k), k) == reconstruct(t, k));
}

TEST_CASE("every input point is within half a cell diagonal") {
  for (int depth = 1; depth <= 6; ++depth) {
    PointCloud norm;
    const Octree t = random_tree(0, depth, 300, 77, &norm);
    const PointCloud r = reconstruct(t, depth);
    const double bound = std::sqrt(3.0) / 2.0 * std::pow(2.0, -depth) + 1e-12;
    for (const auto& p : norm.points()) {
      double best = 1e300;
      for (const auto& q : r.points()) {
        const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
        best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
      }
      CHECK(best <= bound);
    }
  }
}

TEST_CASE("rebuilding from a reconstruction is idempotent") {
  for (int depth : {2, 4, 6}) {
    PointCloud norm;
    const Octree t = random_tree(5, depth, 256, 13, &norm);
    const Octree t2 = build_octree(reconstruct(t, depth), depth);
    CHECK(t2.levels == t.levels);
  }
}

TEST_CASE("duplicate points collapse but keep the original count") {
  const PointCloud c({{0.3, 0.3, 0.3}, {0.3, 0.3, 0.3}, {0.3, 0.3, 0.3}}, true);
  const Octree t = build_octree(c, 3);
  CHECK(t.point_count == 3);
  CHECK(reconstruct(t, 3).size() == 1);
}
