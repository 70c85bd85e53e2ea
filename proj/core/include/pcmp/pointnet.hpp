#pragma once

#include <cstdint>
#include <vector>

#include "pcmp/nn.hpp"
#include "pcmp/point_cloud.hpp"

namespace pcmp::nn {

// Per-point MLP (affine + relu per layer), coordinate-wise max pool,
// then a fully connected head with relu between layers and raw logits out.
// The max pool makes the output exactly invariant to point order.
struct PointNet {
  std::vector<Dense> point_layers;
  std::vector<Dense> head_layers;

  void init(const std::vector<int>& point_dims, const std::vector<int>& head_dims,
            Rng& rng) {
    point_layers.clear();
    head_layers.clear();
    for (std::size_t i = 0; i + 1 < point_dims.size(); ++i) {
      point_layers.emplace_back();
      point_layers.back().init(point_dims[i], point_dims[i + 1], rng);
    }
    for (std::size_t i = 0; i + 1 < head_dims.size(); ++i) {
      head_layers.emplace_back();
      head_layers.back().init(head_dims[i], head_dims[i + 1], rng);
    }
  }

  struct Cache {
    std::vector<Matrix> point_acts;       // [0] = X, then post-relu outputs
    std::vector<Eigen::Index> winners;    // pooled row index per feature dim
    std::vector<Matrix> head_acts;        // [0] = pooled feature, ...
  };

  // Max-pooled per-point feature; ties go to the lowest row index
  // (Eigen's maxCoeff convention), which keeps training deterministic.
  Matrix global_feature(const Matrix& X, Cache* cache = nullptr) const {
    Matrix a = X;
    if (cache) cache->point_acts = {a};
    for (const auto& layer : point_layers) {
      a = relu(layer.forward(a));
      if (cache) cache->point_acts.push_back(a);
    }
    Matrix pooled(1, a.cols());
    if (cache) cache->winners.resize(a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      Eigen::Index row = 0;
      pooled(0, j) = a.col(j).maxCoeff(&row);
      if (cache) cache->winners[j] = row;
    }
    return pooled;
  }

  Vector logits(const Matrix& X, Cache* cache = nullptr) const {
    Matrix a = global_feature(X, cache);
    if (cache) cache->head_acts = {a};
    for (std::size_t i = 0; i < head_layers.size(); ++i) {
      a = head_layers[i].forward(a);
      if (i + 1 < head_layers.size()) a = relu(a);
      if (cache) cache->head_acts.push_back(a);
    }
    return a.row(0).transpose();
  }

  std::vector<const Matrix*> parameters() const {
    std::vector<const Matrix*> out;
    for (const auto& l : point_layers) {
      out.push_back(&l.W);
      out.push_back(&l.b);
    }
    for (const auto& l : head_layers) {
      out.push_back(&l.W);
      out.push_back(&l.b);
    }
    return out;
  }
  std::vector<Matrix*> parameters() {
    std::vector<Matrix*> out;
    for (auto& l : point_layers) {
      out.push_back(&l.W);
      out.push_back(&l.b);
    }
    for (auto& l : head_layers) {
      out.push_back(&l.W);
      out.push_back(&l.b);
    }
    return out;
  }
};

struct PointNetGrad {
  std::vector<DenseGrad> point_grads;
  std::vector<DenseGrad> head_grads;

  void zero_like(const PointNet& net) {
    point_grads.resize(net.point_layers.size());
    head_grads.resize(net.head_layers.size());
    for (std::size_t i = 0; i < point_grads.size(); ++i)
      point_grads[i].zero_like(net.point_layers[i]);
    for (std::size_t i = 0; i < head_grads.size(); ++i)
      head_grads[i].zero_like(net.head_layers[i]);
  }

  // Accumulates parameter gradients for one sample given d(loss)/d(logits).
  void accumulate(const PointNet& net, const PointNet::Cache& cache,
                  const Vector& dlogits) {
    Matrix d = dlogits.transpose();
    for (std::size_t i = net.head_layers.size(); i-- > 0;) {
      if (i + 1 < net.head_layers.size())
        d = relu_backward(cache.head_acts[i + 1], d);
      d = head_grads[i].backward(net.head_layers[i], cache.head_acts[i], d);
    }
    // Pooled-feature gradient flows only to the winning point per dim.
    const Matrix& last = cache.point_acts.back();
    Matrix dpoints = Matrix::Zero(last.rows(), last.cols());
    for (Eigen::Index j = 0; j < last.cols(); ++j)
      dpoints(cache.winners[j], j) = d(0, j);
    for (std::size_t i = net.point_layers.size(); i-- > 0;) {
      dpoints = relu_backward(cache.point_acts[i + 1], dpoints);
      dpoints =
          point_grads[i].backward(net.point_layers[i], cache.point_acts[i], dpoints);
    }
  }

  void attach_to(Adam& adam, PointNet& net) {
    for (std::size_t i = 0; i < net.point_layers.size(); ++i)
      adam.attach(&net.point_layers[i], &point_grads[i]);
    for (std::size_t i = 0; i < net.head_layers.size(); ++i)
      adam.attach(&net.head_layers[i], &head_grads[i]);
  }
};

// Points-as-rows matrix for network input.
Matrix cloud_matrix(const PointCloud& cloud);

// FNV-1a over the little-endian bytes of all parameters, in declaration
// order. Used for freeze checks and cache keys.
std::uint64_t parameters_hash(const PointNet& net);

}  // namespace pcmp::nn
