#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mcsched/rng.hpp"

namespace mcsched::nn {

/// Added to the logits of masked actions before the softmax.
inline constexpr double kMaskLogit = -1e9;

/// log softmax(logits)[a], accumulated in double.
template <typename Col>
double log_prob(const Col& logits, Eigen::Index a) {
  const double mx = static_cast<double>(logits.maxCoeff());
  double sum = 0.0;
  for (Eigen::Index k = 0; k < logits.size(); ++k) sum += std::exp(static_cast<double>(logits[k]) - mx);
  return static_cast<double>(logits[a]) - mx - std::log(sum);
}

struct ParamBlock {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const ParamBlock&) const = default;
};

struct NetworkShape {
  std::size_t input = 0;
  std::size_t hidden = 128;
  std::size_t actions = 0;

  /// Blocks in storage order: trunk, policy head, value head. Matrices are column-major.
  std::vector<ParamBlock> blocks() const {
    std::vector<ParamBlock> out = {
        {"trunk.0.weight", hidden, input, 0}, {"trunk.0.bias", hidden, 1, 0},
        {"trunk.1.weight", hidden, hidden, 0}, {"trunk.1.bias", hidden, 1, 0},
        {"policy.weight", actions, hidden, 0}, {"policy.bias", actions, 1, 0},
        {"value.weight", 1, hidden, 0},       {"value.bias", 1, 1, 0},
    };
    std::size_t offset = 0;
    for (auto& b : out) {
      b.offset = offset;
      offset += b.size();
    }
    return out;
  }
  std::size_t parameter_count() const {
    const auto b = blocks();
    return b.back().offset + b.back().size();
  }
  bool operator==(const NetworkShape&) const = default;
};

/// Shared tanh trunk (two hidden layers) with a categorical policy head
/// and a scalar value head. Parameters live in one flat vector.
template <typename T>
class PolicyNetwork {
 public:
  using Scalar = T;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using MatMap = Eigen::Map<Mat>;
  using ConstMatMap = Eigen::Map<const Mat>;

  PolicyNetwork() = default;
  explicit PolicyNetwork(NetworkShape shape) : shape_(shape), params_(Vec::Zero(shape.parameter_count())) {}

  /// Scaled Gaussian init: 1/sqrt(fan_in) for the trunk and value head,
  /// 0.01/sqrt(fan_in) for the policy head (near-uniform initial policy).
  static PolicyNetwork initialized(NetworkShape shape, Rng& rng, bool zero_policy_head = false) {
    PolicyNetwork net(shape);
    for (const auto& b : shape.blocks()) {
      if (b.cols == 1) continue;  // biases start at zero
      double scale = 1.0 / std::sqrt(static_cast<double>(b.cols));
      if (b.name == "policy.weight") scale = zero_policy_head ? 0.0 : 0.01 * scale;
      for (std::size_t i = 0; i < b.size(); ++i)
        net.params_[static_cast<Eigen::Index>(b.offset + i)] = static_cast<T>(scale * rng.normal());
    }
    return net;
  }

  const NetworkShape& shape() const { return shape_; }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  ConstMatMap block(std::size_t k) const {
    const auto b = shape_.blocks()[k];
    return ConstMatMap(params_.data() + b.offset, static_cast<Eigen::Index>(b.rows),
                       static_cast<Eigen::Index>(b.cols));
  }

  /// Intermediate values of a batched forward pass (one column per sample).
  struct Cache {
    Mat x, h1, h2, logits, probs;
    Vec values;
  };

  /// `x` is input x batch; `mask` is actions x batch with 1 for allowed.
  Cache forward(const Mat& x, const Mat& mask) const {
    Cache c;
    c.x = x;
    c.h1 = ((block(0) * x).colwise() + Vec(block(1))).array().tanh().matrix();
    c.h2 = ((block(2) * c.h1).colwise() + Vec(block(3))).array().tanh().matrix();
    c.logits = (block(4) * c.h2).colwise() + Vec(block(5));
    c.logits.array() += (T(1) - mask.array()) * static_cast<T>(kMaskLogit);
    c.probs.resize(c.logits.rows(), c.logits.cols());
    for (Eigen::Index b = 0; b < c.logits.cols(); ++b) {
      const T mx = c.logits.col(b).maxCoeff();
      // Vectorized exp clamps its input, so masked entries need explicit zeros.
      const auto e = ((c.logits.col(b).array() - mx).exp() * mask.col(b).array()).eval();
      c.probs.col(b) = (e / e.sum()).matrix();
    }
    c.values = ((block(6) * c.h2).array() + block(7)(0, 0)).matrix().transpose();
    return c;
  }

  /// Backpropagates d(loss)/d(logits) and d(loss)/d(values) into a flat gradient.
  Vec backward(const Cache& c, const Mat& d_logits, const Vec& d_values) const {
    Vec grad = Vec::Zero(params_.size());
    const auto blocks = shape_.blocks();
    auto g = [&](std::size_t k) {
      return MatMap(grad.data() + blocks[k].offset, static_cast<Eigen::Index>(blocks[k].rows),
                    static_cast<Eigen::Index>(blocks[k].cols));
    };
    const Mat d_values_row = d_values.transpose();
    g(4) = d_logits * c.h2.transpose();
    g(5) = d_logits.rowwise().sum();
    g(6) = d_values_row * c.h2.transpose();
    g(7)(0, 0) = d_values.sum();

    Mat d_h2 = block(4).transpose() * d_logits + block(6).transpose() * d_values_row;
    d_h2.array() *= (T(1) - c.h2.array().square());
    g(2) = d_h2 * c.h1.transpose();
    g(3) = d_h2.rowwise().sum();

    Mat d_h1 = block(2).transpose() * d_h2;
    d_h1.array() *= (T(1) - c.h1.array().square());
    g(0) = d_h1 * c.x.transpose();
    g(1) = d_h1.rowwise().sum();
    return grad;
  }

  bool operator==(const PolicyNetwork& o) const {
    return shape_ == o.shape_ && params_.size() == o.params_.size() && params_ == o.params_;
  }

 private:
  NetworkShape shape_;
  Vec params_;
};

/// Adam with bias correction.
template <typename T>
class Adam {
 public:
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  Adam(std::size_t n, double lr, double eps = 1e-5, double beta1 = 0.9, double beta2 = 0.999)
      : lr_(lr), eps_(eps), beta1_(beta1), beta2_(beta2), m_(Vec::Zero(n)), v_(Vec::Zero(n)) {}

  void step(Vec& params, const Vec& grad) {
    ++t_;
    m_ = T(beta1_) * m_ + T(1 - beta1_) * grad;
    v_ = T(beta2_) * v_ + T(1 - beta2_) * grad.cwiseProduct(grad);
    const T c1 = T(1 - std::pow(beta1_, t_));
    const T c2 = T(1 - std::pow(beta2_, t_));
    params.array() -= T(lr_) * (m_.array() / c1) / ((v_.array() / c2).sqrt() + T(eps_));
  }

 private:
  double lr_, eps_, beta1_, beta2_;
  long t_ = 0;
  Vec m_, v_;
};

}  // namespace mcsched::nn
