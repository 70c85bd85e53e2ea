#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pcmp/octree.hpp"
#include "pcmp/point_cloud.hpp"

namespace pcmp {

// Adaptive frequency tables over 256 occupancy symbols, one table per
// context id. Laplace-initialized (all counts 1); totals are rescaled by
// halving (floored at 1) when they reach 2^16.
class ContextModel {
 public:
  // Context of a level-l symbol is (l, parent occupancy byte); the root
  // uses parent byte 0x00.
  static std::uint32_t context_id(int level, std::uint8_t parent) {
    return (static_cast<std::uint32_t>(level) << 8) | parent;
  }

  struct Table {
    std::vector<std::uint32_t> freq = std::vector<std::uint32_t>(256, 1);
    std::uint32_t total = 256;
  };

  Table& table(std::uint32_t ctx);
  // Probability the model currently assigns to `symbol` under `ctx`.
  double probability(std::uint32_t ctx, std::uint8_t symbol);
  void update(std::uint32_t ctx, std::uint8_t symbol);

 private:
  std::unordered_map<std::uint32_t, Table> tables_;
};

std::vector<std::uint8_t> arith_encode(std::span<const std::uint8_t> symbols,
                                       std::span<const std::uint32_t> contexts,
                                       ContextModel& model);

// contexts(i) must reproduce the i-th context id used by the encoder.
std::vector<std::uint8_t> arith_decode(
    std::span<const std::uint8_t> payload,
    const std::function<std::uint32_t(std::size_t)>& contexts,
    std::size_t count, ContextModel& model);

struct LevelSegment {
  int level = 0;
  std::uint32_t symbol_count = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const LevelSegment&, const LevelSegment&) = default;
};

// Level-partitioned container: header + one independently decodable
// arithmetic-coded segment per octree depth level.
struct Bitstream {
  int max_depth = 0;
  std::uint64_t point_count = 0;
  NormalizationTransform transform;
  std::vector<LevelSegment> segments;

  std::size_t payload_bytes(int depth) const;  // sum of segments 1..depth
  std::size_t payload_bytes() const { return payload_bytes(max_depth); }
  std::size_t header_bytes() const;

  friend bool operator==(const Bitstream&, const Bitstream&) = default;
};

// Encodes to `max_depth` levels. A raw cloud is normalized internally and
// the transform recorded in the header; an already-normalized cloud is
// stored with the given transform (identity by default).
Bitstream encode_cloud(const PointCloud& cloud, int max_depth);
Bitstream encode_cloud(const PointCloud& normalized_cloud, int max_depth,
                       const NormalizationTransform& transform);

struct DecodeResult {
  Octree octree;                // truncated to the requested depth
  PointCloud cloud;             // denormalized via the header transform
  std::size_t bytes_consumed;   // payload bytes read (segments 1..depth)
};

DecodeResult decode_cloud(const Bitstream& stream, int depth);

Bitstream truncate_stream(const Bitstream& stream, int depth);

// 8 * payload_bytes / point_count; optionally charges the header too.
double bpp(const Bitstream& stream, bool include_header = false);
double bpp(const Bitstream& stream, int depth, bool include_header = false);

// .pcmp container (little-endian; see write_bitstream for the exact layout).
std::vector<std::uint8_t> serialize_bitstream(const Bitstream& stream);
Bitstream deserialize_bitstream(std::span<const std::uint8_t> bytes);
void write_bitstream(const Bitstream& stream, const std::string& path);
Bitstream read_bitstream(const std::string& path);

}  // namespace pcmp
