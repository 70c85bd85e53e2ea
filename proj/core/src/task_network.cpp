#include "pcmp/task_network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "pcmp/hash.hpp"

namespace pcmp {

namespace nn {

Matrix cloud_matrix(const PointCloud& cloud) {
  Matrix X(cloud.size(), 3);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points()[i];
    X(static_cast<Eigen::Index>(i), 0) = p.x;
    X(static_cast<Eigen::Index>(i), 1) = p.y;
    X(static_cast<Eigen::Index>(i), 2) = p.z;
  }
  return X;
}

std::uint64_t parameters_hash(const PointNet& net) {
  std::uint64_t h = kFnvOffset;
  for (const Matrix* m : net.parameters())
    for (Eigen::Index i = 0; i < m->size(); ++i)
      h = fnv1a64_value(m->data()[i], h);
  return h;
}

}  // namespace nn

static nn::Matrix network_input(const PointCloud& cloud) {
  if (cloud.empty()) throw EmptyCloud("task network fed an empty cloud");
  if (cloud.normalized()) return nn::cloud_matrix(cloud);
  return nn::cloud_matrix(normalize(cloud).first);
}

nn::Vector TaskNetwork::probabilities(const PointCloud& cloud) const {
  return nn::softmax(net_.logits(network_input(cloud)));
}

TaskLossResult task_loss(const TaskNetwork& network, const PointCloud& cloud,
                         int label) {
  if (label < 0 || label >= network.num_classes())
    throw InvalidDataset("label out of range");
  TaskLossResult r;
  r.probs = network.probabilities(cloud);
  Eigen::Index top = 0;
  r.probs.maxCoeff(&top);
  r.correct = top == label;
  r.loss = -std::log(std::max(r.probs(label), 1e-300));
  return r;
}

TaskNetwork train_task_network(const std::vector<LabeledCloud>& train,
                               std::uint64_t seed,
                               const TaskTrainConfig& config) {
  if (train.empty()) throw InvalidDataset("empty training set");
  std::set<int> labels;
  int max_label = 0;
  for (const auto& s : train) {
    labels.insert(s.label);
    max_label = std::max(max_label, s.label);
  }
  if (labels.size() < 2)
    throw InvalidDataset("training set must contain at least two classes");
  const int num_classes = max_label + 1;

  Rng rng(seed);
  nn::PointNet net;
  net.init({3, 32, 64}, {64, 32, num_classes}, rng);
  nn::PointNetGrad grad;
  grad.zero_like(net);
  nn::Adam adam;
  grad.attach_to(adam, net);

  // Inputs are normalized once up front; training itself is pure.
  std::vector<nn::Matrix> inputs;
  inputs.reserve(train.size());
  for (const auto& s : train) inputs.push_back(network_input(s.cloud));

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the run's own rng keeps epochs reproducible.
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      grad.zero_like(net);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        nn::PointNet::Cache cache;
        const nn::Vector probs =
            nn::softmax(net.logits(inputs[idx], &cache));
        nn::Vector dlogits = probs;
        dlogits(train[idx].label) -= 1.0;
        dlogits /= static_cast<double>(end - start);
        grad.accumulate(net, cache, dlogits);
      }
      adam.step(config.lr);
    }
  }

  return TaskNetwork(std::move(net), num_classes, /*frozen=*/true);
}

double task_accuracy(const TaskNetwork& network,
                     const std::vector<LabeledCloud>& dataset) {
  if (dataset.empty()) throw InvalidDataset("empty evaluation set");
  std::size_t correct = 0;
  for (const auto& s : dataset)
    if (task_loss(network, s.cloud, s.label).correct) ++correct;
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

// ---- checkpoint ("PTSK": magic, class count, layer shapes, f64 weights) ---

void TaskNetwork::save(const std::string& path) const {
  FILE* f = std::fopen((path + ".tmp").c_str(), "wb");
  if (!f) throw Error("cannot open " + path + ".tmp for writing");
  std::fwrite("PTSK", 1, 4, f);
  const std::uint32_t version = 1;
  std::fwrite(&version, sizeof version, 1, f);
  const std::int32_t classes = num_classes_;
  std::fwrite(&classes, sizeof classes, 1, f);
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
}

TaskNetwork TaskNetwork::load(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw Error("cannot open checkpoint " + path);
  auto fail = [&](const std::string& why) -> Error {
    std::fclose(f);
    return Error(path + ": " + why);
  };
  char magic[4];
  if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "PTSK", 4) != 0)
    throw fail("bad task checkpoint magic");
  std::uint32_t version = 0;
  if (std::fread(&version, sizeof version, 1, f) != 1 || version != 1)
    throw fail("unsupported checkpoint version");
  std::int32_t classes = 0;
  std::uint32_t count = 0;
  if (std::fread(&classes, sizeof classes, 1, f) != 1 ||
      std::fread(&count, sizeof count, 1, f) != 1)
    throw fail("truncated checkpoint header");

  TaskNetwork out;
  Rng rng(0);
  out.net_.init({3, 32, 64}, {64, 32, classes}, rng);
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
  out.num_classes_ = classes;
  out.frozen_ = true;
  return out;
}

}  // namespace pcmp
