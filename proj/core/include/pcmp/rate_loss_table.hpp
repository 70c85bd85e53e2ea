#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcmp/codec.hpp"
#include "pcmp/task_network.hpp"

namespace pcmp {

struct RateLossEntry {
  double bpp = 0.0;
  double loss = 0.0;
  bool correct = false;

  friend bool operator==(const RateLossEntry&, const RateLossEntry&) = default;
};

// Per-sample (bpp, task loss) at every candidate depth level. The training
// signal for the depth predictor; codec and task network never need to be
// re-run once this exists.
struct RateLossTable {
  std::string task_id;
  std::vector<int> candidate_levels;            // ascending
  std::vector<std::vector<RateLossEntry>> rows; // rows[sample][k]
  std::uint64_t dataset_hash = 0;
  std::uint64_t codec_hash = 0;
  std::uint64_t network_hash = 0;

  int k() const { return static_cast<int>(candidate_levels.size()); }
  std::size_t samples() const { return rows.size(); }

  friend bool operator==(const RateLossTable&, const RateLossTable&) = default;
};

struct CodecConfig {
  int max_depth = 8;

  std::uint64_t hash() const;
};

std::uint64_t dataset_hash(const std::vector<LabeledCloud>& dataset);

RateLossTable build_rate_loss_table(const std::vector<LabeledCloud>& dataset,
                                    const CodecConfig& codec,
                                    const TaskNetwork& network,
                                    const std::vector<int>& candidate_levels,
                                    const std::string& task_id = "classify");

// CSV rows (sample_id, level, bpp, loss, correct) plus a JSON metadata
// sidecar at path + ".json".
void save_rate_loss_table(const RateLossTable& table, const std::string& path);
RateLossTable load_rate_loss_table(const std::string& path);

// Disk-cached build keyed by (dataset, codec, network, levels, task) hashes;
// a corrupt or mismatching cache entry is rebuilt. cache_dir defaults to
// $PCMP_CACHE_DIR, or no caching when unset.
RateLossTable build_rate_loss_table_cached(
    const std::vector<LabeledCloud>& dataset, const CodecConfig& codec,
    const TaskNetwork& network, const std::vector<int>& candidate_levels,
    const std::string& task_id = "classify", std::string cache_dir = "");

}  // namespace pcmp
