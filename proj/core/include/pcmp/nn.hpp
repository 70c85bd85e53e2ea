#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "pcmp/rng.hpp"

namespace pcmp::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Fully connected layer; rows of X are samples (or points).
struct Dense {
  Matrix W;  // in x out
  Matrix b;  // 1 x out

  void init(int in, int out, Rng& rng) {
    W.resize(in, out);
    b = Matrix::Zero(1, out);
    const double scale = std::sqrt(2.0 / in);
    for (int i = 0; i < in; ++i)
      for (int j = 0; j < out; ++j) W(i, j) = scale * rng.gaussian();
  }

  Matrix forward(const Matrix& X) const {
    return (X * W).rowwise() + b.row(0);
  }
};

struct DenseGrad {
  Matrix W;
  Matrix b;

  void zero_like(const Dense& layer) {
    W = Matrix::Zero(layer.W.rows(), layer.W.cols());
    b = Matrix::Zero(1, layer.b.cols());
  }

  // dY is the gradient at the layer output; X the input it saw.
  // Returns the gradient at the input.
  Matrix backward(const Dense& layer, const Matrix& X, const Matrix& dY) {
    W.noalias() += X.transpose() * dY;
    b += dY.colwise().sum();
    return dY * layer.W.transpose();
  }
};

inline Matrix relu(const Matrix& X) { return X.cwiseMax(0.0); }

// Mask dY by the activation pattern of the (post-relu) output Y.
inline Matrix relu_backward(const Matrix& Y, const Matrix& dY) {
  return (Y.array() > 0.0).cast<double>() * dY.array();
}

inline Vector softmax(const Vector& z) {
  const Vector shifted = z.array() - z.maxCoeff();
  Vector e = shifted.array().exp();
  return e / e.sum();
}

class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void attach(Matrix* param, const Matrix* grad) {
    slots_.push_back({param, grad, Matrix::Zero(param->rows(), param->cols()),
                      Matrix::Zero(param->rows(), param->cols())});
  }

  void attach(Dense* layer, const DenseGrad* grad) {
    attach(&layer->W, &grad->W);
    attach(&layer->b, &grad->b);
  }

  void step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (auto& s : slots_) {
      s.m = beta1_ * s.m + (1.0 - beta1_) * (*s.grad);
      s.v = beta2_ * s.v + (1.0 - beta2_) * s.grad->cwiseProduct(*s.grad);
      s.param->array() -=
          lr * (s.m.array() / bc1) /
          ((s.v.array() / bc2).sqrt() + eps_);
    }
  }

 private:
  struct Slot {
    Matrix* param;
    const Matrix* grad;
    Matrix m;
    Matrix v;
  };

  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Slot> slots_;
};

}  // namespace pcmp::nn
