#include "pcmp/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace pcmp {

std::string Policy::name() const {
  switch (kind) {
    case Kind::kFixed: return "fixed:" + std::to_string(fixed_level);
    case Kind::kOracle: return "oracle";
    case Kind::kLearned: return "learned";
  }
  return "?";
}

std::vector<int> oracle_select(const RateLossTable& table, double lambda) {
  std::vector<int> out;
  out.reserve(table.samples());
  for (const auto& row : table.rows) {
    int best = 0;
    double best_cost = lambda * row[0].bpp + row[0].loss;
    for (std::size_t k = 1; k < row.size(); ++k) {
      const double cost = lambda * row[k].bpp + row[k].loss;
      if (cost < best_cost) {
        best_cost = cost;
        best = static_cast<int>(k);
      }
    }
    out.push_back(table.candidate_levels[best]);
  }
  return out;
}

static int level_index(const RateLossTable& table, int level) {
  const auto it = std::find(table.candidate_levels.begin(),
                            table.candidate_levels.end(), level);
  if (it == table.candidate_levels.end())
    throw ConfigError("level " + std::to_string(level) +
                      " is not a candidate level");
  return static_cast<int>(it - table.candidate_levels.begin());
}

std::vector<int> policy_depths(const Policy& policy,
                               const std::vector<LabeledCloud>& dataset,
                               const RateLossTable& table, double lambda) {
  if (table.samples() != dataset.size())
    throw TableMismatch("table does not cover the dataset");
  switch (policy.kind) {
    case Policy::Kind::kFixed: {
      level_index(table, policy.fixed_level);
      return std::vector<int>(dataset.size(), policy.fixed_level);
    }
    case Policy::Kind::kOracle:
      return oracle_select(table, lambda);
    case Policy::Kind::kLearned: {
      if (!policy.model) throw ConfigError("learned policy without a model");
      std::vector<int> out;
      out.reserve(dataset.size());
      for (const auto& s : dataset)
        out.push_back(predict_depth(*policy.model, s.cloud));
      return out;
    }
  }
  throw ConfigError("unknown policy kind");
}

EvalReport evaluate_policy(const Policy& policy,
                           const std::vector<LabeledCloud>& dataset,
                           const RateLossTable& table, double lambda) {
  const std::vector<int> depths = policy_depths(policy, dataset, table, lambda);

  EvalReport r;
  r.policy = policy.name();
  r.lambda = lambda;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const RateLossEntry& e = table.rows[i][level_index(table, depths[i])];
    r.mean_bpp += e.bpp;
    r.mean_loss += e.loss;
    r.mean_depth += depths[i];
    if (e.correct) ++correct;
  }
  const auto n = static_cast<double>(dataset.size());
  r.mean_bpp /= n;
  r.mean_loss /= n;
  r.mean_depth /= n;
  r.accuracy = static_cast<double>(correct) / n;
  r.mean_objective = lambda * r.mean_bpp + r.mean_loss;
  r.selection_percentages = selection_histogram(depths, table.candidate_levels);
  return r;
}

std::vector<double> selection_histogram(
    const std::vector<int>& depths, const std::vector<int>& candidate_levels) {
  std::vector<double> pct(candidate_levels.size(), 0.0);
  for (const int d : depths) {
    const auto it =
        std::find(candidate_levels.begin(), candidate_levels.end(), d);
    if (it == candidate_levels.end())
      throw ConfigError("selected depth outside the candidate set");
    pct[static_cast<std::size_t>(it - candidate_levels.begin())] += 1.0;
  }
  for (auto& p : pct) p *= 100.0 / static_cast<double>(depths.size());
  return pct;
}

std::vector<RdRow> rd_sweep(const std::vector<double>& lambdas,
                            const std::vector<LabeledCloud>& dataset,
                            const RateLossTable& table, std::uint64_t seed,
                            const PredictorTrainConfig& config) {
  if (lambdas.empty()) throw ConfigError("lambda list is empty");

  std::vector<RdRow> rows;
  auto push = [&](const EvalReport& rep) {
    rows.push_back({rep.lambda, rep.policy, rep.mean_bpp, rep.accuracy,
                    rep.mean_loss, rep.mean_objective, rep.mean_depth});
  };

  for (const double lambda : lambdas) {
    const PredictorModel model =
        train_predictor(dataset, table, lambda, seed, config);
    push(evaluate_policy(Policy::learned(model), dataset, table, lambda));
    push(evaluate_policy(Policy::oracle(), dataset, table, lambda));
    for (const int level : table.candidate_levels)
      push(evaluate_policy(Policy::fixed(level), dataset, table, lambda));
  }
  return rows;
}

void write_rd_csv(const std::vector<RdRow>& rows, const std::string& path) {
  const std::string tmp = path + ".tmp";
  FILE* f = std::fopen(tmp.c_str(), "w");
  if (!f) throw Error("cannot open " + tmp + " for writing");
  std::fprintf(f,
               "lambda,policy,mean_bpp,accuracy,mean_loss,mean_objective,"
               "mean_depth\n");
  for (const auto& r : rows)
    std::fprintf(f, "%.6f,%s,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.lambda,
                 r.policy.c_str(), r.mean_bpp, r.accuracy, r.mean_loss,
                 r.mean_objective, r.mean_depth);
  std::fclose(f);
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("cannot rename " + tmp);
}

void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::vector<int>& candidate_levels,
                       const std::string& path) {
  const std::string tmp = path + ".tmp";
  FILE* f = std::fopen(tmp.c_str(), "w");
  if (!f) throw Error("cannot open " + tmp + " for writing");
  std::fprintf(f, "policy,lambda,mean_bpp,accuracy,mean_loss,mean_objective,mean_depth");
  for (const int l : candidate_levels) std::fprintf(f, ",pct_level_%d", l);
  std::fprintf(f, "\n");
  for (const auto& r : reports) {
    std::fprintf(f, "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", r.policy.c_str(),
                 r.lambda, r.mean_bpp, r.accuracy, r.mean_loss,
                 r.mean_objective, r.mean_depth);
    for (const double p : r.selection_percentages) std::fprintf(f, ",%.6f", p);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("cannot rename " + tmp);
}

PartitionPlan plan_partition(
    const std::vector<std::pair<const PredictorModel*, std::string>>& tasks,
    const PointCloud& cloud, int max_depth) {
  if (tasks.empty()) throw ConfigError("plan_partition needs at least one task");

  PartitionPlan plan;
  for (const auto& [model, task_id] : tasks) {
    if (!model) throw ConfigError("null predictor for task " + task_id);
    const int depth = predict_depth(*model, cloud);
    if (depth > max_depth)
      throw ConfigError("predicted depth exceeds the stream depth");
    plan.tasks.push_back({task_id, depth});
  }
  std::stable_sort(plan.tasks.begin(), plan.tasks.end(),
                   [](const PartitionCut& a, const PartitionCut& b) {
                     return a.depth < b.depth;
                   });
  for (const auto& t : plan.tasks)
    if (plan.cuts.empty() || plan.cuts.back() != t.depth)
      plan.cuts.push_back(t.depth);
  if (plan.cuts.empty() || plan.cuts.back() != max_depth)
    plan.cuts.push_back(max_depth);  // human vision takes the full stream
  return plan;
}

}  // namespace pcmp
