#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "pcmp/codec.hpp"
#include "pcmp/rng.hpp"
#include "pcmp/shapes.hpp"

using namespace pcmp;

namespace {

// Independent size oracle: replays the adaptive model and accumulates the
// ideal code length, without touching the range coder.
double replay_cross_entropy_bits(const std::vector<std::uint8_t>& symbols,
                                 const std::vector<std::uint32_t>& contexts) {
  ContextModel model;
  double bits = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    bits -= std::log2(model.probability(contexts[i], symbols[i]));
    model.update(contexts[i], symbols[i]);
  }
  return bits;
}

std::vector<std::uint8_t> roundtrip(const std::vector<std::uint8_t>& symbols,
                                    const std::vector<std::uint32_t>& contexts) {
  ContextModel enc_model;
  const auto payload = arith_encode(symbols, contexts, enc_model);
  ContextModel dec_model;
  return arith_decode(
      payload, [&](std::size_t i) { return contexts[i]; }, symbols.size(),
      dec_model);
}

}  // namespace

TEST_CASE("constant symbol stream compresses far below raw size") {
  std::vector<std::uint8_t> symbols(1000, 0x42);
  std::vector<std::uint32_t> contexts(1000, 7);
  ContextModel model;
  const auto payload = arith_encode(symbols, contexts, model);
  CHECK(payload.size() < 40);
  const double oracle_bits = replay_cross_entropy_bits(symbols, contexts);
  CHECK(8.0 * payload.size() <= oracle_bits * 1.02 + 64 * 8);
  CHECK(roundtrip(symbols, contexts) == symbols);
}

TEST_CASE("uniform random symbols are incompressible") {
  Rng rng(2024);
  std::vector<std::uint8_t> symbols(4096);
  for (auto& s : symbols) s = static_cast<std::uint8_t>(rng.below(256));
  std::vector<std::uint32_t> contexts(symbols.size(), 1);
  ContextModel model;
  const auto payload = arith_encode(symbols, contexts, model);
  CHECK(payload.size() >= 4096);
  CHECK(roundtrip(symbols, contexts) == symbols);
}

TEST_CASE("empty input is a bare flush") {
  ContextModel model;
  const auto payload = arith_encode({}, {}, model);
  CHECK(payload.size() <= 8);
}

TEST_CASE("coded size tracks the adaptive cross-entropy on skewed sources") {
  Rng rng(99);
  std::vector<std::uint8_t> symbols;
  std::vector<std::uint32_t> contexts;
  for (int i = 0; i < 100000; ++i) {
    // Mixture: mostly small symbols, occasional arbitrary bytes.
    const std::uint8_t s = rng.uniform() < 0.85
                               ? static_cast<std::uint8_t>(rng.below(8))
                               : static_cast<std::uint8_t>(rng.below(256));
    symbols.push_back(s);
    contexts.push_back(static_cast<std::uint32_t>(rng.below(4)));
  }
  ContextModel model;
  const auto payload = arith_encode(symbols, contexts, model);
  const double oracle_bits = replay_cross_entropy_bits(symbols, contexts);
  CHECK(8.0 * payload.size() <= oracle_bits * 1.02 + 64 * 8);
  CHECK(8.0 * payload.size() >= oracle_bits);  // entropy is a lower bound
  CHECK(roundtrip(symbols, contexts) == symbols);
}

TEST_CASE("truncated payload raises CorruptStream") {
  std::vector<std::uint8_t> symbols(500);
  std::vector<std::uint32_t> contexts(500, 3);
  Rng rng(5);
  for (auto& s : symbols) s = static_cast<std::uint8_t>(rng.below(256));
  ContextModel model;
  auto payload = arith_encode(symbols, contexts, model);
  payload.resize(payload.size() / 2);
  ContextModel fresh;
  CHECK_THROWS_AS(arith_decode(
                      payload, [&](std::size_t i) { return contexts[i]; },
                      symbols.size(), fresh),
                  CorruptStream);
}

TEST_CASE("count zero decodes to nothing regardless of payload") {
  ContextModel model;
  const auto out = arith_decode(
      {}, [](std::size_t) { return 0u; }, 0, model);
  CHECK(out.empty());
}

TEST_CASE("single-point cloud yields one tiny segment per level") {
  const PointCloud c({{0.3, 0.6, 0.2}}, true);
  const Bitstream s = encode_cloud(c, 4, {});
  REQUIRE(s.segments.size() == 4);
  std::size_t total = 0;
  for (const auto& seg : s.segments) {
    CHECK(seg.symbol_count == 1);
    total += seg.payload.size();
  }
  CHECK(total <= 32);
}

namespace {

Bitstream encode_sample(int kind, std::size_t n, std::uint64_t seed, int depth) {
  const auto s = generate_shape(static_cast<ShapeKind>(kind), n, seed, 0.02);
  return encode_cloud(s.cloud, depth);
}

}  // namespace

TEST_CASE("lossless octree round trip at every depth") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto s =
        generate_shape(static_cast<ShapeKind>(seed % 6), 200 + 37 * seed, seed, 0.02);
    auto [norm, t] = normalize(s.cloud);
    const int depth = 2 + static_cast<int>(seed % 5);
    const Bitstream stream = encode_cloud(norm, depth, t);
    for (int k = 1; k <= depth; ++k) {
      const DecodeResult r = decode_cloud(stream, k);
      CHECK(r.octree == build_octree(norm, k));
      CHECK(r.bytes_consumed == stream.payload_bytes(k));
    }
  }
}

TEST_CASE("prefix decode equals decode of truncated stream") {
  const Bitstream s = encode_sample(3, 500, 17, 6);
  for (int k = 1; k <= 6; ++k) {
    const Bitstream cut = truncate_stream(s, k);
    CHECK(decode_cloud(s, k).octree == decode_cloud(cut, k).octree);
    CHECK(decode_cloud(s, k).cloud == decode_cloud(cut, k).cloud);
  }
  CHECK(truncate_stream(s, 6) == s);
}

TEST_CASE("identical prefixes for clouds equal at a shallow quantization") {
  std::vector<Point3> a = {{0.3, 0.3, 0.3}, {0.7, 0.2, 0.6}, {0.1, 0.9, 0.4}};
  std::vector<Point3> b = a;
  b[0].x += 0.004;  // same depth-3 cell, different deep cells
  const Bitstream sa = encode_cloud(PointCloud(a, true), 8, {});
  const Bitstream sb = encode_cloud(PointCloud(b, true), 8, {});
  for (int k = 0; k < 3; ++k) CHECK(sa.segments[k] == sb.segments[k]);
  CHECK(sa.segments != sb.segments);  // deeper levels diverge
}

TEST_CASE("encoding is deterministic") {
  const Bitstream a = encode_sample(1, 400, 23, 6);
  const Bitstream b = encode_sample(1, 400, 23, 6);
  CHECK(serialize_bitstream(a) == serialize_bitstream(b));
}

TEST_CASE("bpp arithmetic") {
  Bitstream s;
  s.max_depth = 1;
  s.point_count = 800;
  s.segments.push_back({1, 10, std::vector<std::uint8_t>(100, 0)});
  CHECK(bpp(s) == 1.0);
  CHECK(bpp(s, true) > 1.0);

  Bitstream empty = s;
  empty.segments[0].payload.clear();
  CHECK(bpp(empty) == 0.0);

  const Bitstream real = encode_sample(0, 600, 3, 7);
  for (int k = 1; k < 7; ++k) CHECK(bpp(real, k) <= bpp(real, k + 1));
}

TEST_CASE("container round trip and header checks") {
  const Bitstream s = encode_sample(2, 300, 5, 5);
  const auto bytes = serialize_bitstream(s);
  CHECK(bytes.size() == s.header_bytes() + s.payload_bytes());
  CHECK(deserialize_bitstream(bytes) == s);

  auto corrupt = bytes;
  corrupt[0] = 'X';
  CHECK_THROWS_AS(deserialize_bitstream(corrupt), CorruptStream);
  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(deserialize_bitstream(truncated), CorruptStream);

  const auto path = (std::filesystem::temp_directory_path() / "t.pcmp").string();
  write_bitstream(s, path);
  CHECK(read_bitstream(path) == s);
}

TEST_CASE("decode depth bounds") {
  const Bitstream s = encode_sample(2, 100, 5, 3);
  CHECK_THROWS_AS(decode_cloud(s, 0), DepthOutOfRange);
  CHECK_THROWS_AS(decode_cloud(s, 4), DepthOutOfRange);
}

TEST_CASE("denormalized decode approximates the source cloud") {
  const auto s = generate_shape(ShapeKind::kSphereSurface, 400, 31, 0.0);
  const Bitstream stream = encode_cloud(s.cloud, 8);
  const DecodeResult r = decode_cloud(stream, 8);
  CHECK_FALSE(r.cloud.normalized());
  // Reconstruction error is bounded by the voxel diagonal in source units.
  const double cell = s.cloud.bbox().max_edge() / 256.0;
  for (const auto& p : s.cloud.points()) {
    double best = 1e300;
    for (const auto& q : r.cloud.points()) {
      const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    CHECK(std::sqrt(best) <= cell * std::sqrt(3.0));
  }
}
