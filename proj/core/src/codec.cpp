#include "pcmp/codec.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "pcmp/range_coder.hpp"

namespace pcmp {

ContextModel::Table& ContextModel::table(std::uint32_t ctx) {
  return tables_[ctx];
}

double ContextModel::probability(std::uint32_t ctx, std::uint8_t symbol) {
  Table& t = table(ctx);
  return static_cast<double>(t.freq[symbol]) / t.total;
}

void ContextModel::update(std::uint32_t ctx, std::uint8_t symbol) {
  Table& t = table(ctx);
  t.freq[symbol] += 32;
  t.total += 32;
  if (t.total >= (1u << 16)) {
    std::uint32_t total = 0;
    for (auto& f : t.freq) {
      f = std::max(1u, f / 2);
      total += f;
    }
    t.total = total;
  }
}

std::vector<std::uint8_t> arith_encode(std::span<const std::uint8_t> symbols,
                                       std::span<const std::uint32_t> contexts,
                                       ContextModel& model) {
  if (symbols.size() != contexts.size())
    throw ConfigError("arith_encode: symbols/contexts length mismatch");
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    ContextModel::Table& t = model.table(contexts[i]);
    std::uint32_t cum = 0;
    for (int s = 0; s < symbols[i]; ++s) cum += t.freq[s];
    enc.encode(cum, t.freq[symbols[i]], t.total);
    model.update(contexts[i], symbols[i]);
  }
  return enc.finish();
}

std::vector<std::uint8_t> arith_decode(
    std::span<const std::uint8_t> payload,
    const std::function<std::uint32_t(std::size_t)>& contexts,
    std::size_t count, ContextModel& model) {
  std::vector<std::uint8_t> symbols;
  if (count == 0) return symbols;
  symbols.reserve(count);
  RangeDecoder dec(payload);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t ctx = contexts(i);
    ContextModel::Table& t = model.table(ctx);
    const std::uint32_t target = dec.decode_freq(t.total);
    std::uint32_t cum = 0;
    int sym = 0;
    while (cum + t.freq[sym] <= target) cum += t.freq[sym++];
    dec.decode_update(cum, t.freq[sym]);
    model.update(ctx, static_cast<std::uint8_t>(sym));
    symbols.push_back(static_cast<std::uint8_t>(sym));
  }
  return symbols;
}

// Parent context byte per symbol of level l+1, expanded from level l.
static std::vector<std::uint8_t> expand_parents(
    const std::vector<std::uint8_t>& level_bytes) {
  std::vector<std::uint8_t> parents;
  for (const std::uint8_t b : level_bytes)
    parents.insert(parents.end(), std::popcount(b), b);
  return parents;
}

Bitstream encode_cloud(const PointCloud& cloud, int max_depth) {
  if (cloud.normalized()) return encode_cloud(cloud, max_depth, {});
  auto [norm, transform] = normalize(cloud);
  return encode_cloud(norm, max_depth, transform);
}

Bitstream encode_cloud(const PointCloud& normalized_cloud, int max_depth,
                       const NormalizationTransform& transform) {
  const Octree tree = build_octree(normalized_cloud, max_depth);

  Bitstream stream;
  stream.max_depth = max_depth;
  stream.point_count = tree.point_count;
  stream.transform = transform;
  stream.segments.reserve(max_depth);

  ContextModel model;
  std::vector<std::uint8_t> parents = {0x00};  // root sentinel
  for (int level = 1; level <= max_depth; ++level) {
    const auto& bytes = tree.levels[level - 1];
    std::vector<std::uint32_t> contexts;
    contexts.reserve(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i)
      contexts.push_back(ContextModel::context_id(level, parents[i]));

    LevelSegment seg;
    seg.level = level;
    seg.symbol_count = static_cast<std::uint32_t>(bytes.size());
    // Flush per level so each segment decodes in isolation.
    seg.payload = arith_encode(bytes, contexts, model);
    stream.segments.push_back(std::move(seg));

    if (level < max_depth) parents = expand_parents(bytes);
  }
  return stream;
}

DecodeResult decode_cloud(const Bitstream& stream, int depth) {
  if (depth < 1 || depth > stream.max_depth)
    throw DepthOutOfRange("decode depth out of range");

  Octree tree;
  tree.max_depth = depth;
  tree.point_count = stream.point_count;
  tree.levels.resize(depth);

  std::size_t consumed = 0;
  ContextModel model;
  std::vector<std::uint8_t> parents = {0x00};
  for (int level = 1; level <= depth; ++level) {
    const LevelSegment& seg = stream.segments[level - 1];
    if (seg.symbol_count != parents.size())
      throw CorruptStream("segment symbol count disagrees with parent level");
    auto symbols = arith_decode(
        seg.payload,
        [&](std::size_t i) { return ContextModel::context_id(level, parents[i]); },
        seg.symbol_count, model);
    for (const std::uint8_t b : symbols)
      if (b == 0) throw CorruptStream("zero occupancy byte");
    consumed += seg.payload.size();
    if (level < depth) parents = expand_parents(symbols);
    tree.levels[level - 1] = std::move(symbols);
  }

  DecodeResult result;
  result.cloud = denormalize(reconstruct(tree, depth), stream.transform);
  result.octree = std::move(tree);
  result.bytes_consumed = consumed;
  return result;
}

Bitstream truncate_stream(const Bitstream& stream, int depth) {
  if (depth < 1 || depth > stream.max_depth)
    throw DepthOutOfRange("truncate depth out of range");
  Bitstream out;
  out.max_depth = depth;
  out.point_count = stream.point_count;
  out.transform = stream.transform;
  out.segments.assign(stream.segments.begin(), stream.segments.begin() + depth);
  return out;
}

std::size_t Bitstream::payload_bytes(int depth) const {
  std::size_t total = 0;
  for (int i = 0; i < depth; ++i) total += segments[i].payload.size();
  return total;
}

std::size_t Bitstream::header_bytes() const {
  return 4 + 1 + 1 + 2 + 8 + 4 * 8 + static_cast<std::size_t>(max_depth) * 8;
}

double bpp(const Bitstream& stream, bool include_header) {
  return bpp(stream, stream.max_depth, include_header);
}

double bpp(const Bitstream& stream, int depth, bool include_header) {
  if (stream.point_count == 0) throw ConfigError("bpp: zero point count");
  std::size_t bytes = stream.payload_bytes(depth);
  if (include_header) bytes += stream.header_bytes();
  return 8.0 * static_cast<double>(bytes) /
         static_cast<double>(stream.point_count);
}

// ---- .pcmp serialization -------------------------------------------------
// magic "PCMP", version u8 (=1), max_depth u8, reserved u16, point_count u64,
// transform offset 3*f64, transform scale f64, per-level symbol counts n*u32,
// per-level payload lengths n*u32, then the n payload blobs. Little-endian.

namespace {

void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::endian::native == std::endian::little);
  put_bytes(out, &value, sizeof(T));
}

struct ByteReader {
  std::span<const std::uint8_t> in;
  std::size_t pos = 0;

  void read(void* p, std::size_t n) {
    if (pos + n > in.size()) throw CorruptStream("pcmp container truncated");
    std::memcpy(p, in.data() + pos, n);
    pos += n;
  }
  template <typename T>
  T get_le() {
    T v;
    read(&v, sizeof(T));
    return v;
  }
};

}  // namespace

std::vector<std::uint8_t> serialize_bitstream(const Bitstream& s) {
  std::vector<std::uint8_t> out;
  put_bytes(out, "PCMP", 4);
  put_le<std::uint8_t>(out, 1);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(s.max_depth));
  put_le<std::uint16_t>(out, 0);
  put_le<std::uint64_t>(out, s.point_count);
  put_le<double>(out, s.transform.offset.x);
  put_le<double>(out, s.transform.offset.y);
  put_le<double>(out, s.transform.offset.z);
  put_le<double>(out, s.transform.scale);
  for (const auto& seg : s.segments) put_le<std::uint32_t>(out, seg.symbol_count);
  for (const auto& seg : s.segments)
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(seg.payload.size()));
  for (const auto& seg : s.segments)
    put_bytes(out, seg.payload.data(), seg.payload.size());
  return out;
}

Bitstream deserialize_bitstream(std::span<const std::uint8_t> bytes) {
  ByteReader r{bytes};
  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, "PCMP", 4) != 0)
    throw CorruptStream("bad magic (expected PCMP)");
  const auto version = r.get_le<std::uint8_t>();
  if (version != 1) throw CorruptStream("unsupported pcmp version");
  Bitstream s;
  s.max_depth = r.get_le<std::uint8_t>();
  if (s.max_depth < 1 || s.max_depth > kMaxOctreeDepth)
    throw CorruptStream("max_depth out of range");
  r.get_le<std::uint16_t>();  // reserved
  s.point_count = r.get_le<std::uint64_t>();
  s.transform.offset.x = r.get_le<double>();
  s.transform.offset.y = r.get_le<double>();
  s.transform.offset.z = r.get_le<double>();
  s.transform.scale = r.get_le<double>();
  s.segments.resize(s.max_depth);
  for (int i = 0; i < s.max_depth; ++i) {
    s.segments[i].level = i + 1;
    s.segments[i].symbol_count = r.get_le<std::uint32_t>();
  }
  std::vector<std::uint32_t> lengths(s.max_depth);
  for (auto& len : lengths) len = r.get_le<std::uint32_t>();
  for (int i = 0; i < s.max_depth; ++i) {
    s.segments[i].payload.resize(lengths[i]);
    r.read(s.segments[i].payload.data(), lengths[i]);
  }
  if (r.pos != bytes.size()) throw CorruptStream("trailing bytes in container");
  return s;
}

void write_bitstream(const Bitstream& stream, const std::string& path) {
  const auto bytes = serialize_bitstream(stream);
  const std::string tmp = path + ".tmp";
  FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw Error("cannot open " + tmp + " for writing");
  if (!bytes.empty() && std::fwrite(bytes.data(), 1, bytes.size(), f) != bytes.size()) {
    std::fclose(f);
    throw Error("short write to " + tmp);
  }
  std::fclose(f);
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("cannot rename " + tmp + " to " + path);
}

Bitstream read_bitstream(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw CorruptStream("cannot open " + path);
  std::fseek(f, 0, SEEK_END);
  const long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0 && std::fread(bytes.data(), 1, bytes.size(), f) != bytes.size()) {
    std::fclose(f);
    throw CorruptStream("short read from " + path);
  }
  std::fclose(f);
  return deserialize_bitstream(bytes);
}

}  // namespace pcmp
