#pragma once

#include <cstdint>
#include <vector>

#include "pcmp/point_cloud.hpp"

namespace pcmp {

inline constexpr int kMaxOctreeDepth = 16;

// Level-ordered occupancy-byte octree. levels[l] holds one byte per
// non-empty node at depth l+1, in breadth-first (Morton) order. Bit k of a
// byte is set iff child octant k is non-empty, with octant index
// (x_bit << 2) | (y_bit << 1) | z_bit.
struct Octree {
  int max_depth = 0;
  std::vector<std::vector<std::uint8_t>> levels;
  std::uint64_t point_count = 0;

  friend bool operator==(const Octree&, const Octree&) = default;
};

Octree build_octree(const PointCloud& cloud, int max_depth);

// One point per occupied node at `depth`, at the node's cube center,
// in breadth-first order. Result lives in the normalized unit cube.
PointCloud reconstruct(const Octree& tree, int depth);
inline PointCloud reconstruct(const Octree& tree) {
  return reconstruct(tree, tree.max_depth);
}

Octree truncate(const Octree& tree, int depth);

}  // namespace pcmp
