#pragma once

#include <string>
#include <vector>

#include "pcmp/predictor.hpp"
#include "pcmp/rate_loss_table.hpp"

namespace pcmp {

struct Policy {
  enum class Kind { kFixed, kOracle, kLearned };

  Kind kind = Kind::kFixed;
  int fixed_level = 0;
  const PredictorModel* model = nullptr;

  static Policy fixed(int level) { return {Kind::kFixed, level, nullptr}; }
  static Policy oracle() { return {Kind::kOracle, 0, nullptr}; }
  static Policy learned(const PredictorModel& m) {
    return {Kind::kLearned, 0, &m};
  }

  std::string name() const;
};

struct EvalReport {
  std::string policy;
  double lambda = 0.0;
  double mean_bpp = 0.0;
  double mean_loss = 0.0;
  double accuracy = 0.0;        // top-1 task metric
  double mean_objective = 0.0;  // mean of lambda*bpp + loss
  double mean_depth = 0.0;
  std::vector<double> selection_percentages;  // per candidate level, sums to 100
};

// Per-sample argmin_i (lambda*bpp_i + loss_i); ties to the lower level.
std::vector<int> oracle_select(const RateLossTable& table, double lambda);

// Depth per sample under the policy; learned policies run predict_depth.
std::vector<int> policy_depths(const Policy& policy,
                               const std::vector<LabeledCloud>& dataset,
                               const RateLossTable& table, double lambda);

EvalReport evaluate_policy(const Policy& policy,
                           const std::vector<LabeledCloud>& dataset,
                           const RateLossTable& table, double lambda);

std::vector<double> selection_histogram(const std::vector<int>& depths,
                                        const std::vector<int>& candidate_levels);

struct RdRow {
  double lambda = 0.0;
  std::string policy;
  double mean_bpp = 0.0;
  double accuracy = 0.0;
  double mean_loss = 0.0;
  double mean_objective = 0.0;
  double mean_depth = 0.0;
};

// One learned policy trained per lambda, plus oracle and every fixed level.
std::vector<RdRow> rd_sweep(const std::vector<double>& lambdas,
                            const std::vector<LabeledCloud>& dataset,
                            const RateLossTable& table, std::uint64_t seed,
                            const PredictorTrainConfig& config = {});

void write_rd_csv(const std::vector<RdRow>& rows, const std::string& path);
void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::vector<int>& candidate_levels,
                       const std::string& path);

struct PartitionCut {
  std::string task_id;
  int depth = 0;
};

// Ordered per-task depth cuts; the final cut is always the full stream
// depth reserved for human vision.
struct PartitionPlan {
  std::vector<PartitionCut> tasks;  // sorted by depth
  std::vector<int> cuts;            // strictly increasing, last == max depth
};

PartitionPlan plan_partition(
    const std::vector<std::pair<const PredictorModel*, std::string>>& tasks,
    const PointCloud& cloud, int max_depth);

}  // namespace pcmp
