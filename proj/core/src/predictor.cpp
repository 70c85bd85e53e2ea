#include "pcmp/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace pcmp {

PredictorModel::PredictorModel(std::vector<int> candidate_levels,
                               std::uint64_t init_seed)
    : candidate_levels_(std::move(candidate_levels)) {
  if (candidate_levels_.size() < 2)
    throw ConfigError("predictor needs at least two candidate levels");
  Rng rng(init_seed);
  net_.init({3, 64, 128, kGlobalFeatureDim},
            {kGlobalFeatureDim, 128, static_cast<int>(candidate_levels_.size())},
            rng);
}

static nn::Matrix predictor_input(const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyCloud("predictor fed an empty cloud");
  if (cloud.normalized()) return nn::cloud_matrix(cloud);
  return nn::cloud_matrix(normalize(cloud).first);
}

nn::Vector extract_feature(const PointCloud& cloud, const PredictorModel& model) {
  return model.net().global_feature(predictor_input(cloud)).row(0).transpose();
}

nn::Vector forward_probs(const nn::Vector& feature, const PredictorModel& model) {
  nn::Matrix a = feature.transpose();
  const auto& head = model.net().head_layers;
  for (std::size_t i = 0; i < head.size(); ++i) {
    a = head[i].forward(a);
    if (i + 1 < head.size()) a = nn::relu(a);
  }
  return nn::softmax(a.row(0).transpose());
}

double gumbel_noise(double uniform_sample) {
  if (!(uniform_sample > 0.0) || !(uniform_sample < 1.0))
    throw DomainError("gumbel_noise requires a sample in (0,1)");
  return -std::log(-std::log(uniform_sample));
}

SelectionOutcome gumbel_select(const nn::Vector& probs, double tau,
                               const nn::Vector& noise) {
  if (tau <= 0.0) throw DomainError("temperature must be > 0");
  if (noise.size() != probs.size())
    throw ConfigError("noise length must match probability length");

  SelectionOutcome out;
  out.probs = probs;
  out.noisy = probs + noise;
  out.tau = tau;

  // Ties break toward the lower (cheaper) level.
  int best = 0;
  for (int i = 1; i < out.noisy.size(); ++i)
    if (out.noisy(i) > out.noisy(best)) best = i;
  out.selected = best;
  out.hard = nn::Vector::Zero(probs.size());
  out.hard(best) = 1.0;
  out.soft = nn::softmax(out.noisy / tau);
  return out;
}

double selection_loss(const nn::Vector& bpp_vec, const nn::Vector& loss_vec,
                      const nn::Vector& soft, double lambda) {
  if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
  if (bpp_vec.size() != soft.size() || loss_vec.size() != soft.size())
    throw ConfigError("selection_loss vector length mismatch");
  return ((lambda * bpp_vec + loss_vec).array() * soft.array()).sum();
}

double TemperatureSchedule::at(int epoch) const {
  if (total_epochs <= 1) return end;
  const int e = std::clamp(epoch, 0, total_epochs - 1);
  const double t = static_cast<double>(e) / (total_epochs - 1);
  return start * std::pow(end / start, t);
}

namespace {

nn::Vector cost_vector(const RateLossTable& table, std::size_t sample,
                       double lambda) {
  const auto& row = table.rows[sample];
  nn::Vector c(static_cast<int>(row.size()));
  for (std::size_t k = 0; k < row.size(); ++k)
    c(static_cast<int>(k)) = lambda * row[k].bpp + row[k].loss;
  return c;
}

// d(selection_loss)/d(logits) through the soft relaxation:
// s = softmax((p+G)/tau), p = softmax(z).
nn::Vector objective_dlogits(const nn::Vector& probs, const SelectionOutcome& sel,
                             const nn::Vector& cost) {
  const nn::Vector& s = sel.soft;
  const double cs = cost.dot(s);
  const nn::Vector d_phat = (s.array() * (cost.array() - cs)) / sel.tau;
  const double dp_p = d_phat.dot(probs);
  return (probs.array() * (d_phat.array() - dp_p)).matrix();
}

}  // namespace

PredictorModel train_predictor(const std::vector<LabeledCloud>& dataset,
                               const RateLossTable& table, double lambda,
                               std::uint64_t seed,
                               const PredictorTrainConfig& config,
                               std::vector<EpochStats>* stats) {
  if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
  if (table.samples() != dataset.size())
    throw TableMismatch("rate/loss table does not cover the dataset");
  if (table.dataset_hash != 0 && table.dataset_hash != dataset_hash(dataset))
    throw TableMismatch("rate/loss table was built from a different dataset");
  for (const auto& row : table.rows)
    if (static_cast<int>(row.size()) != table.k())
      throw TableMismatch("rate/loss table row is incomplete");

  PredictorModel model(table.candidate_levels, seed);
  nn::PointNetGrad grad;
  grad.zero_like(model.net());
  nn::Adam adam;
  grad.attach_to(adam, model.net());

  Rng rng(seed ^ 0xA5A5A5A5A5A5A5A5ull);

  std::vector<nn::Matrix> inputs;
  inputs.reserve(dataset.size());
  for (const auto& s : dataset) inputs.push_back(predictor_input(s.cloud));
  std::vector<nn::Vector> costs;
  costs.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i)
    costs.push_back(cost_vector(table, i, lambda));

  // Selection gradients are computed on costs divided by the mean per-sample
  // spread, so the balance against the entropy penalty (and Adam's warmup)
  // does not depend on the raw cost magnitude, which varies with lambda.
  double cost_scale = 0.0;
  for (const auto& c : costs) cost_scale += c.maxCoeff() - c.minCoeff();
  cost_scale /= static_cast<double>(costs.size());
  if (!(cost_scale > 0.0)) cost_scale = 1.0;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  const int k = table.k();
  const int draws = std::max(1, config.noise_draws);
  nn::PointNet best_net = model.net();
  double best_objective = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double tau = config.schedule.at(epoch);
    const double lr =
        epoch < config.lr_switch_epoch ? config.lr_initial : config.lr_final;
    const double anneal =
        config.epochs > 1
            ? 1.0 - static_cast<double>(epoch) / (config.epochs - 1)
            : 0.0;
    const double beta = config.entropy_weight * anneal / tau;
    double objective_sum = 0.0;

    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      grad.zero_like(model.net());
      for (std::size_t idx = start; idx < end; ++idx) {
        const std::size_t s = order[idx];
        nn::PointNet::Cache cache;
        const nn::Vector probs =
            nn::softmax(model.net().logits(inputs[s], &cache));
        const nn::Vector scaled = costs[s] / cost_scale;
        nn::Vector dlogits = nn::Vector::Zero(k);
        // Allocation-free draw loop: per draw, s = softmax((p+G)/tau) and
        // d_phat = s * (c - c.s)/tau are averaged; this equals averaging
        // gumbel_select + objective_dlogits over the draws (hot path).
        nn::Vector phat(k), soft(k);
        nn::Vector d_phat_mean = nn::Vector::Zero(k);
        for (int d = 0; d < draws; ++d) {
          for (int j = 0; j < k; ++j)
            phat(j) = probs(j) + gumbel_noise(rng.uniform_open());
          if (d == 0) {  // hard forward objective, first draw
            int sel = 0;
            for (int j = 1; j < k; ++j)
              if (phat(j) > phat(sel)) sel = j;
            objective_sum += costs[s](sel);
          }
          soft = ((phat.array() - phat.maxCoeff()) / tau).exp();
          soft /= soft.sum();
          const double cs = scaled.dot(soft);
          d_phat_mean.array() +=
              soft.array() * (scaled.array() - cs) / tau;
        }
        d_phat_mean /= static_cast<double>(draws);
        const double dp_p = d_phat_mean.dot(probs);
        dlogits = (probs.array() * (d_phat_mean.array() - dp_p)).matrix();
        if (beta > 0.0) {
          const double neg_entropy =
              (probs.array() * probs.array().log()).sum();
          dlogits += beta * (probs.array() *
                             (probs.array().log() - neg_entropy))
                                .matrix();
        }
        dlogits /= static_cast<double>(end - start);
        grad.accumulate(model.net(), cache, dlogits);
      }
      adam.step(lr);
    }

    // Noise-free selections of the current weights; the returned model is
    // the best epoch-end snapshot under the true (hard, un-noised) objective.
    double eval_sum = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const nn::Vector p = nn::softmax(model.net().logits(inputs[i]));
      int best = 0;
      for (int j = 1; j < k; ++j)
        if (p(j) > p(best)) best = j;
      eval_sum += costs[i](best);
    }
    if (eval_sum < best_objective) {
      best_objective = eval_sum;
      best_net = model.net();
    }

    if (stats)
      stats->push_back(
          {objective_sum / static_cast<double>(order.size()), tau});
  }
  model.net() = best_net;
  return model;
}

int predict_depth(const PredictorModel& model, const PointCloud& cloud) {
  const nn::Vector probs =
      forward_probs(extract_feature(cloud, model), model);
  int best = 0;
  for (int i = 1; i < probs.size(); ++i)
    if (probs(i) > probs(best)) best = i;
  return model.candidate_levels()[best];
}

double gradient_check(const PredictorModel& model,
                      const std::vector<LabeledCloud>& batch,
                      const RateLossTable& table, double lambda, double tau,
                      const std::vector<nn::Vector>& frozen_noise,
                      bool head_only, int coords_per_matrix,
                      std::uint64_t sample_seed) {
  if (batch.empty() || frozen_noise.size() != batch.size())
    throw ConfigError("gradient_check needs one frozen noise vector per sample");

  PredictorModel work = model;  // perturbed in place for finite differences
  std::vector<nn::Matrix> inputs;
  for (const auto& s : batch) inputs.push_back(predictor_input(s.cloud));
  std::vector<nn::Vector> costs;
  for (std::size_t i = 0; i < batch.size(); ++i)
    costs.push_back(cost_vector(table, i, lambda));

  // Relu and max-pool make the objective only piecewise differentiable; a
  // finite-difference step that flips an activation sign or a pooling
  // winner straddles a kink where central differences are meaningless, so
  // such coordinates are skipped (the analytic value is the valid
  // one-sided gradient there).
  struct Piece {
    std::vector<Eigen::Index> winners;
    std::vector<Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>> masks;
  };
  const auto piece_of = [](const nn::PointNet::Cache& cache) {
    Piece p;
    p.winners = cache.winners;
    for (std::size_t a = 1; a < cache.point_acts.size(); ++a)
      p.masks.push_back(cache.point_acts[a].array() > 0.0);
    for (std::size_t a = 1; a + 1 < cache.head_acts.size(); ++a)
      p.masks.push_back(cache.head_acts[a].array() > 0.0);
    return p;
  };
  const auto same_piece = [](const Piece& a, const Piece& b) {
    if (a.winners != b.winners || a.masks.size() != b.masks.size())
      return false;
    for (std::size_t m = 0; m < a.masks.size(); ++m)
      if (!(a.masks[m] == b.masks[m]).all()) return false;
    return true;
  };
  std::vector<Piece> base_pieces(batch.size());
  const auto objective = [&](bool* piece_stable) {
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      nn::PointNet::Cache cache;
      const nn::Vector probs = nn::softmax(work.net().logits(inputs[i], &cache));
      if (piece_stable && !same_piece(piece_of(cache), base_pieces[i]))
        *piece_stable = false;
      const SelectionOutcome sel = gumbel_select(probs, tau, frozen_noise[i]);
      sum += selection_loss(nn::Vector::Zero(costs[i].size()), costs[i],
                            sel.soft, 0.0);
    }
    return sum / static_cast<double>(batch.size());
  };

  // Analytic gradients of the relaxed objective.
  nn::PointNetGrad grad;
  grad.zero_like(work.net());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    nn::PointNet::Cache cache;
    const nn::Vector probs = nn::softmax(work.net().logits(inputs[i], &cache));
    const SelectionOutcome sel = gumbel_select(probs, tau, frozen_noise[i]);
    const nn::Vector dlogits = objective_dlogits(probs, sel, costs[i]) /
                               static_cast<double>(batch.size());
    grad.accumulate(work.net(), cache, dlogits);
    base_pieces[i] = piece_of(cache);
  }

  std::vector<nn::Matrix*> params;
  std::vector<const nn::Matrix*> grads;
  auto add = [&](nn::Dense& layer, nn::DenseGrad& g) {
    params.push_back(&layer.W);
    grads.push_back(&g.W);
    params.push_back(&layer.b);
    grads.push_back(&g.b);
  };
  if (!head_only) {
    for (std::size_t i = 0; i < work.net().point_layers.size(); ++i)
      add(work.net().point_layers[i], grad.point_grads[i]);
  }
  for (std::size_t i = 0; i < work.net().head_layers.size(); ++i)
    add(work.net().head_layers[i], grad.head_grads[i]);

  constexpr double kStep = 1e-4;
  double max_rel = 0.0;
  Rng coord_rng(sample_seed ^ 0xC3D2E1F0C3D2E1F0ull);
  for (std::size_t p = 0; p < params.size(); ++p) {
    nn::Matrix& m = *params[p];
    const nn::Matrix& g = *grads[p];
    std::vector<Eigen::Index> coords;
    if (coords_per_matrix > 0 &&
        static_cast<Eigen::Index>(coords_per_matrix) < m.size()) {
      for (int c = 0; c < coords_per_matrix; ++c)
        coords.push_back(static_cast<Eigen::Index>(
            coord_rng.below(static_cast<std::uint64_t>(m.size()))));
    } else {
      for (Eigen::Index i = 0; i < m.size(); ++i) coords.push_back(i);
    }
    for (const Eigen::Index i : coords) {
      const double saved = m.data()[i];
      bool stable = true;
      m.data()[i] = saved + kStep;
      const double plus = objective(&stable);
      m.data()[i] = saved - kStep;
      const double minus = objective(&stable);
      m.data()[i] = saved;
      if (!stable) continue;
      const double fd = (plus - minus) / (2.0 * kStep);
      const double an = g.data()[i];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
      max_rel = std::max(max_rel, std::abs(fd - an) / denom);
    }
  }
  return max_rel;
}

// ---- checkpoint ("PMDL") ---------------------------------------------------

void PredictorModel::save(const std::string& path,
                          const std::string& metadata_json) const {
  FILE* f = std::fopen((path + ".tmp").c_str(), "wb");
  if (!f) throw Error("cannot open " + path + ".tmp for writing");
  std::fwrite("PMDL", 1, 4, f);
  const std::uint32_t version = 1;
  std::fwrite(&version, sizeof version, 1, f);
  const std::uint32_t k_levels = static_cast<std::uint32_t>(k());
  std::fwrite(&k_levels, sizeof k_levels, 1, f);
  for (const int l : candidate_levels_) {
    const std::int32_t v = l;
    std::fwrite(&v, sizeof v, 1, f);
  }
  const auto params = net_.parameters();
  const std::uint32_t count = static_cast<std::uint32_t>(params.size());
  std::fwrite(&count, sizeof count, 1, f);
  for (const nn::Matrix* m : params) {
    const std::int64_t rows = m->rows(), cols = m->cols();
    std::fwrite(&rows, sizeof rows, 1, f);
    std::fwrite(&cols, sizeof cols, 1, f);
    std::fwrite(m->data(), sizeof(double), static_cast<std::size_t>(m->size()), f);
  }
  std::fclose(f);
  if (std::rename((path + ".tmp").c_str(), path.c_str()) != 0)
    throw Error("cannot rename checkpoint into place: " + path);

  // Training metadata sidecar; content is caller-provided JSON.
  std::ofstream side(path + ".json.tmp");
  side << nlohmann::json::parse(metadata_json).dump(2) << "\n";
  side.close();
  if (std::rename((path + ".json.tmp").c_str(), (path + ".json").c_str()) != 0)
    throw Error("cannot rename sidecar into place: " + path + ".json");
}

PredictorModel PredictorModel::load(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw Error("cannot open checkpoint " + path);
  auto fail = [&](const std::string& why) -> Error {
    std::fclose(f);
    return Error(path + ": " + why);
  };
  char magic[4];
  if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "PMDL", 4) != 0)
    throw fail("bad predictor checkpoint magic");
  std::uint32_t version = 0;
  if (std::fread(&version, sizeof version, 1, f) != 1 || version != 1)
    throw fail("unsupported checkpoint version");
  std::uint32_t k_levels = 0;
  if (std::fread(&k_levels, sizeof k_levels, 1, f) != 1 || k_levels < 2 ||
      k_levels > 64)
    throw fail("bad candidate level count");
  std::vector<int> levels(k_levels);
  for (auto& l : levels) {
    std::int32_t v = 0;
    if (std::fread(&v, sizeof v, 1, f) != 1) throw fail("truncated levels");
    l = v;
  }
  std::uint32_t count = 0;
  if (std::fread(&count, sizeof count, 1, f) != 1)
    throw fail("truncated checkpoint header");

  PredictorModel out(levels, /*init_seed=*/0);
  const auto params = out.net_.parameters();
  if (params.size() != count) throw fail("checkpoint parameter count mismatch");
  for (nn::Matrix* m : params) {
    std::int64_t rows = 0, cols = 0;
    if (std::fread(&rows, sizeof rows, 1, f) != 1 ||
        std::fread(&cols, sizeof cols, 1, f) != 1 || rows != m->rows() ||
        cols != m->cols())
      throw fail("checkpoint shape mismatch");
    if (std::fread(m->data(), sizeof(double),
                   static_cast<std::size_t>(m->size()),
                   f) != static_cast<std::size_t>(m->size()))
      throw fail("truncated checkpoint weights");
  }
  std::fclose(f);
  return out;
}

}  // namespace pcmp
