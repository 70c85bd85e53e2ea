#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcmp/pointnet.hpp"
#include "pcmp/rate_loss_table.hpp"

namespace pcmp {

inline constexpr int kGlobalFeatureDim = 256;

// Octree depth level predictor: per-point MLP 3->64->128->256 with max
// pooling, then an FC head 256->128->K producing one probability per
// candidate depth level. Trained with Gumbel-Softmax hard/soft selection
// against precomputed per-level (bpp, loss) tables; codec and task network
// stay frozen.
class PredictorModel {
 public:
  PredictorModel() = default;
  PredictorModel(std::vector<int> candidate_levels, std::uint64_t init_seed);

  int k() const { return static_cast<int>(candidate_levels_.size()); }
  const std::vector<int>& candidate_levels() const { return candidate_levels_; }
  const nn::PointNet& net() const { return net_; }
  nn::PointNet& net() { return net_; }

  std::uint64_t weights_hash() const { return nn::parameters_hash(net_); }

  // Binary weights at `path` plus a JSON training-metadata sidecar.
  void save(const std::string& path,
            const std::string& metadata_json = "{}") const;
  static PredictorModel load(const std::string& path);

 private:
  nn::PointNet net_;
  std::vector<int> candidate_levels_;
};

// Permutation-invariant 256-d global feature of a normalized cloud.
nn::Vector extract_feature(const PointCloud& cloud, const PredictorModel& model);

// Softmax head probabilities over the K candidate levels.
nn::Vector forward_probs(const nn::Vector& feature, const PredictorModel& model);

// Standard Gumbel transform -log(-log(eps)), eps in (0,1).
double gumbel_noise(double uniform_sample);

struct SelectionOutcome {
  nn::Vector probs;   // p, on the simplex
  nn::Vector noisy;   // p_hat = p + G
  nn::Vector hard;    // one-hot at argmax p_hat (ties to the lowest index)
  nn::Vector soft;    // softmax(p_hat / tau)
  double tau = 0.0;
  int selected = 0;   // argmax index
};

// `noise` carries one Gumbel draw per candidate; tests pass zeros to pin
// the selection to argmax p.
SelectionOutcome gumbel_select(const nn::Vector& probs, double tau,
                               const nn::Vector& noise);

// sum_i (lambda*bpp_i + loss_i) * soft_i; linear in the soft weights.
double selection_loss(const nn::Vector& bpp_vec, const nn::Vector& loss_vec,
                      const nn::Vector& soft, double lambda);

struct TemperatureSchedule {
  double start = 3.0;
  double end = 0.001;
  int total_epochs = 50;

  // Exponential interpolation between the endpoints.
  double at(int epoch) const;
};

struct PredictorTrainConfig {
  int epochs = 50;
  int batch = 48;
  double lr_initial = 1e-3;
  double lr_final = 1e-4;
  int lr_switch_epoch = 40;  // first epoch at lr_final
  TemperatureSchedule schedule;
  // Per-sample gradients are averaged over this many independent Gumbel
  // draws; the draws are cheap (K-dimensional) next to the network pass.
  int noise_draws = 128;
  // Weight of a negative-entropy penalty on p that keeps the softmax from
  // saturating before the selection signal has shaped the weights. Applied
  // as weight * (1 - epoch/(epochs-1)) / tau so its strength tracks the
  // 1/tau growth of the selection gradient, then anneals to zero.
  double entropy_weight = 0.1;
};

struct EpochStats {
  double mean_objective = 0.0;  // hard-selection lambda*bpp + loss
  double tau = 0.0;
};

PredictorModel train_predictor(const std::vector<LabeledCloud>& dataset,
                               const RateLossTable& table, double lambda,
                               std::uint64_t seed,
                               const PredictorTrainConfig& config = {},
                               std::vector<EpochStats>* stats = nullptr);

// Argmax of p; no noise at inference.
int predict_depth(const PredictorModel& model, const PointCloud& cloud);

// Max relative error between analytic gradients of the relaxed objective
// and central finite differences (step 1e-4), with the provided frozen
// noise draws. `head_only` restricts the check (and the analytic gradient)
// to the head layers. By default every weight is differenced; a positive
// `coords_per_matrix` instead samples that many coordinates per parameter
// matrix (seeded), trading coverage for speed.
double gradient_check(const PredictorModel& model,
                      const std::vector<LabeledCloud>& batch,
                      const RateLossTable& table, double lambda, double tau,
                      const std::vector<nn::Vector>& frozen_noise,
                      bool head_only = false, int coords_per_matrix = 0,
                      std::uint64_t sample_seed = 0);

}  // namespace pcmp
