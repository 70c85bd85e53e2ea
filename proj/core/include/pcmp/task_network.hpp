#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcmp/pointnet.hpp"

namespace pcmp {

// Frozen point-cloud classifier standing in for the downstream vision
// network: per-point MLP 3->32->64, max pool, FC 64->32->C, softmax.
class TaskNetwork {
 public:
  TaskNetwork() = default;
  TaskNetwork(nn::PointNet net, int num_classes, bool frozen)
      : net_(std::move(net)), num_classes_(num_classes), frozen_(frozen) {}

  int num_classes() const { return num_classes_; }
  bool frozen() const { return frozen_; }
  const nn::PointNet& net() const { return net_; }

  // Class probabilities; the cloud is normalized internally when needed.
  nn::Vector probabilities(const PointCloud& cloud) const;

  std::uint64_t weights_hash() const { return nn::parameters_hash(net_); }

  void save(const std::string& path) const;
  static TaskNetwork load(const std::string& path);

  friend class TaskTrainer;

 private:
  nn::PointNet net_;
  int num_classes_ = 0;
  bool frozen_ = false;
};

struct TaskLossResult {
  double loss = 0.0;  // cross-entropy against the ground-truth label
  bool correct = false;
  nn::Vector probs;
};

TaskLossResult task_loss(const TaskNetwork& network, const PointCloud& cloud,
                         int label);

struct TaskTrainConfig {
  int epochs = 60;
  int batch = 32;
  double lr = 3e-3;
};

// Cross-entropy training on raw (uncompressed) clouds; the returned
// network is frozen. Requires at least two classes in the train set.
TaskNetwork train_task_network(const std::vector<LabeledCloud>& train,
                               std::uint64_t seed,
                               const TaskTrainConfig& config = {});

double task_accuracy(const TaskNetwork& network,
                     const std::vector<LabeledCloud>& dataset);

}  // namespace pcmp
