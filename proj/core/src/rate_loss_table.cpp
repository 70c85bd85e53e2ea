#include "pcmp/rate_loss_table.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pcmp/hash.hpp"

namespace pcmp {

std::uint64_t CodecConfig::hash() const {
  std::uint64_t h = fnv1a64(std::string("pcmp-codec-v1"));
  h = fnv1a64_value(static_cast<std::int32_t>(max_depth), h);
  return h;
}

std::uint64_t dataset_hash(const std::vector<LabeledCloud>& dataset) {
  std::uint64_t h = kFnvOffset;
  for (const auto& s : dataset) {
    h = fnv1a64_value(static_cast<std::int32_t>(s.label), h);
    for (const auto& p : s.cloud.points()) {
      h = fnv1a64_value(p.x, h);
      h = fnv1a64_value(p.y, h);
      h = fnv1a64_value(p.z, h);
    }
  }
  return h;
}

RateLossTable build_rate_loss_table(const std::vector<LabeledCloud>& dataset,
                                    const CodecConfig& codec,
                                    const TaskNetwork& network,
                                    const std::vector<int>& candidate_levels,
                                    const std::string& task_id) {
  if (!network.frozen()) throw ConfigError("task network must be frozen");
  if (candidate_levels.empty()) throw ConfigError("no candidate levels");
  for (std::size_t i = 0; i < candidate_levels.size(); ++i) {
    if (candidate_levels[i] < 1 || candidate_levels[i] > codec.max_depth ||
        (i > 0 && candidate_levels[i] <= candidate_levels[i - 1]))
      throw ConfigError("candidate levels must be ascending and within depth");
  }

  RateLossTable table;
  table.task_id = task_id;
  table.candidate_levels = candidate_levels;
  table.dataset_hash = dataset_hash(dataset);
  table.codec_hash = codec.hash();
  table.network_hash = network.weights_hash();
  table.rows.reserve(dataset.size());

  for (const auto& sample : dataset) {
    auto [norm, transform] = normalize(sample.cloud);
    const Bitstream full = encode_cloud(norm, codec.max_depth, transform);
    const Octree tree = build_octree(norm, codec.max_depth);
    std::vector<RateLossEntry> row;
    row.reserve(candidate_levels.size());
    for (const int level : candidate_levels) {
      RateLossEntry e;
      e.bpp = bpp(truncate_stream(full, level));
      // Evaluate the task on what a decoder actually hands downstream: the
      // reconstruction mapped back to source coordinates.
      const PointCloud recon = denormalize(reconstruct(tree, level), transform);
      const TaskLossResult t = task_loss(network, recon, sample.label);
      e.loss = t.loss;
      e.correct = t.correct;
      row.push_back(e);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void save_rate_loss_table(const RateLossTable& table, const std::string& path) {
  std::string csv = "sample_id,level,bpp,loss,correct\n";
  {
    char buf[160];
    for (std::size_t s = 0; s < table.rows.size(); ++s) {
      for (int k = 0; k < table.k(); ++k) {
        const RateLossEntry& e = table.rows[s][k];
        std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%d\n", s,
                      table.candidate_levels[k], e.bpp, e.loss,
                      e.correct ? 1 : 0);
        csv += buf;
      }
    }
    const std::string tmp = path + ".tmp";
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw Error("cannot open " + tmp + " for writing");
    f << csv;
    f.close();
    std::filesystem::rename(tmp, path);
  }

  nlohmann::json meta;
  meta["csv_hash"] = fnv1a64(csv);
  meta["task_id"] = table.task_id;
  meta["candidate_levels"] = table.candidate_levels;
  meta["samples"] = table.samples();
  meta["dataset_hash"] = table.dataset_hash;
  meta["codec_hash"] = table.codec_hash;
  meta["network_hash"] = table.network_hash;
  const std::string jtmp = path + ".json.tmp";
  std::ofstream out(jtmp);
  out << meta.dump(2) << "\n";
  out.close();
  std::filesystem::rename(jtmp, path + ".json");
}

RateLossTable load_rate_loss_table(const std::string& path) {
  std::ifstream meta_in(path + ".json");
  if (!meta_in) throw CacheCorrupt("missing table metadata " + path + ".json");
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const std::exception& e) {
    throw CacheCorrupt(std::string("bad table metadata: ") + e.what());
  }

  RateLossTable table;
  try {
    table.task_id = meta.at("task_id").get<std::string>();
    table.candidate_levels = meta.at("candidate_levels").get<std::vector<int>>();
    table.dataset_hash = meta.at("dataset_hash").get<std::uint64_t>();
    table.codec_hash = meta.at("codec_hash").get<std::uint64_t>();
    table.network_hash = meta.at("network_hash").get<std::uint64_t>();
    table.rows.resize(meta.at("samples").get<std::size_t>());
  } catch (const std::exception& e) {
    throw CacheCorrupt(std::string("incomplete table metadata: ") + e.what());
  }

  std::ifstream raw(path, std::ios::binary);
  if (!raw) throw CacheCorrupt("missing table CSV " + path);
  const std::string csv((std::istreambuf_iterator<char>(raw)), {});
  try {
    if (meta.at("csv_hash").get<std::uint64_t>() != fnv1a64(csv))
      throw CacheCorrupt("table CSV does not match its metadata hash");
  } catch (const nlohmann::json::exception& e) {
    throw CacheCorrupt(std::string("incomplete table metadata: ") + e.what());
  }

  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t sample_id;
    int level, correct;
    double bpp_v, loss_v;
    if (std::sscanf(line.c_str(), "%zu,%d,%lg,%lg,%d", &sample_id, &level,
                    &bpp_v, &loss_v, &correct) != 5)
      throw CacheCorrupt("bad table row: " + line);
    if (sample_id >= table.rows.size()) throw CacheCorrupt("sample id overflow");
    table.rows[sample_id].push_back({bpp_v, loss_v, correct != 0});
  }
  for (const auto& row : table.rows)
    if (static_cast<int>(row.size()) != table.k())
      throw CacheCorrupt("table row has wrong entry count");
  return table;
}

RateLossTable build_rate_loss_table_cached(
    const std::vector<LabeledCloud>& dataset, const CodecConfig& codec,
    const TaskNetwork& network, const std::vector<int>& candidate_levels,
    const std::string& task_id, std::string cache_dir) {
  if (cache_dir.empty()) {
    if (const char* env = std::getenv("PCMP_CACHE_DIR")) cache_dir = env;
  }
  if (cache_dir.empty())
    return build_rate_loss_table(dataset, codec, network, candidate_levels,
                                 task_id);

  std::uint64_t key = dataset_hash(dataset);
  key = fnv1a64_value(codec.hash(), key);
  key = fnv1a64_value(network.weights_hash(), key);
  for (const int l : candidate_levels)
    key = fnv1a64_value(static_cast<std::int32_t>(l), key);
  key = fnv1a64(task_id, key);

  char name[64];
  std::snprintf(name, sizeof name, "rlt_%016" PRIx64 ".csv", key);
  const std::string path = cache_dir + "/" + name;

  if (std::filesystem::exists(path)) {
    try {
      RateLossTable cached = load_rate_loss_table(path);
      if (cached.dataset_hash == dataset_hash(dataset) &&
          cached.codec_hash == codec.hash() &&
          cached.network_hash == network.weights_hash() &&
          cached.candidate_levels == candidate_levels)
        return cached;
    } catch (const CacheCorrupt&) {
      // fall through to rebuild
    }
  }

  RateLossTable table =
      build_rate_loss_table(dataset, codec, network, candidate_levels, task_id);
  std::filesystem::create_directories(cache_dir);
  save_rate_loss_table(table, path);
  return table;
}

}  // namespace pcmp
