#include "pcmp/octree.hpp"

#include <algorithm>
#include <cmath>

namespace pcmp {

Octree build_octree(const PointCloud& cloud, int max_depth) {
  if (cloud.empty()) throw EmptyCloud("cannot build an octree from no points");
  if (max_depth < 1 || max_depth > kMaxOctreeDepth)
    throw ConfigError("max_depth must be in [1, 16]");

  const double cells = static_cast<double>(1ull << max_depth);

  // One Morton key per point: octant digits from the root down, x highest.
  std::vector<std::uint64_t> keys;
  keys.reserve(cloud.size());
  for (const auto& p : cloud.points()) {
    if (p.x < 0.0 || p.x >= 1.0 || p.y < 0.0 || p.y >= 1.0 || p.z < 0.0 ||
        p.z >= 1.0)
      throw NotNormalized("point outside [0,1)^3");
    const auto ix = static_cast<std::uint64_t>(p.x * cells);
    const auto iy = static_cast<std::uint64_t>(p.y * cells);
    const auto iz = static_cast<std::uint64_t>(p.z * cells);
    std::uint64_t key = 0;
    for (int l = 0; l < max_depth; ++l) {
      const int b = max_depth - 1 - l;
      const std::uint64_t oct =
          (((ix >> b) & 1) << 2) | (((iy >> b) & 1) << 1) | ((iz >> b) & 1);
      key = (key << 3) | oct;
    }
    keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  Octree tree;
  tree.max_depth = max_depth;
  tree.point_count = cloud.size();
  tree.levels.resize(max_depth);

  for (int level = 1; level <= max_depth; ++level) {
    auto& bytes = tree.levels[level - 1];
    const int shift = 3 * (max_depth - level);
    std::uint64_t prev_parent = ~0ull;
    for (const std::uint64_t key : keys) {
      const std::uint64_t parent = key >> (shift + 3);
      const int oct = static_cast<int>((key >> shift) & 7);
      if (parent != prev_parent || bytes.empty()) {
        bytes.push_back(0);
        prev_parent = parent;
      }
      bytes.back() |= static_cast<std::uint8_t>(1u << oct);
    }
  }
  return tree;
}

PointCloud reconstruct(const Octree& tree, int depth) {
  if (depth < 1 || depth > tree.max_depth)
    throw DepthOutOfRange("reconstruct depth out of range");

  struct Cell {
    std::uint32_t x, y, z;
  };
  std::vector<Cell> cells = {{0, 0, 0}};
  for (int level = 0; level < depth; ++level) {
    std::vector<Cell> next;
    const auto& bytes = tree.levels[level];
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      const Cell& c = cells[i];
      for (int oct = 0; oct < 8; ++oct) {
        if (bytes[i] & (1u << oct)) {
          next.push_back({(c.x << 1) | ((oct >> 2) & 1),
                          (c.y << 1) | ((oct >> 1) & 1),
                          (c.z << 1) | (oct & 1)});
        }
      }
    }
    cells = std::move(next);
  }

  const double inv = 1.0 / static_cast<double>(1ull << depth);
  std::vector<Point3> pts;
  pts.reserve(cells.size());
  for (const Cell& c : cells)
    pts.push_back({(c.x + 0.5) * inv, (c.y + 0.5) * inv, (c.z + 0.5) * inv});
  return PointCloud(std::move(pts), true);
}

Octree truncate(const Octree& tree, int depth) {
  if (depth < 1 || depth > tree.max_depth)
    throw DepthOutOfRange("truncate depth out of range");
  Octree out;
  out.max_depth = depth;
  out.point_count = tree.point_count;
  out.levels.assign(tree.levels.begin(), tree.levels.begin() + depth);
  return out;
}

}  // namespace pcmp
