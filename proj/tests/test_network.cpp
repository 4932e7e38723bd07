#include <gtest/gtest.h>

#include "mcsched/network.hpp"

using namespace mcsched;
using Net = nn::PolicyNetwork<double>;

namespace {

Net::Mat random_mask(Rng& rng, Eigen::Index actions, Eigen::Index batch) {
  Net::Mat m(actions, batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    for (Eigen::Index a = 0; a < actions; ++a) m(a, b) = rng.bernoulli(0.6) ? 1.0 : 0.0;
    if (m.col(b).sum() == 0) m(actions - 1, b) = 1.0;
  }
  return m;
}

Net::Mat random_input(Rng& rng, Eigen::Index rows, Eigen::Index batch) {
  Net::Mat x(rows, batch);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
  return x;
}

}  // namespace

TEST(Shape, BlockTableCoversParameters) {
  const nn::NetworkShape s{14, 8, 5};
  const auto blocks = s.blocks();
  ASSERT_EQ(blocks.size(), 8u);
  EXPECT_EQ(blocks[0].name, "trunk.0.weight");
  EXPECT_EQ(blocks[0].rows, 8u);
  EXPECT_EQ(blocks[0].cols, 14u);
  EXPECT_EQ(blocks[4].name, "policy.weight");
  EXPECT_EQ(blocks[4].rows, 5u);
  EXPECT_EQ(blocks[7].name, "value.bias");
  EXPECT_EQ(s.parameter_count(), 14u * 8 + 8 + 8 * 8 + 8 + 8 * 5 + 5 + 8 + 1);
  for (std::size_t k = 1; k < blocks.size(); ++k) EXPECT_EQ(blocks[k].offset, blocks[k - 1].offset + blocks[k - 1].size());
}

TEST(Forward, MaskedActionsGetZeroProbability) {
  Rng rng(1);
  const auto net = Net::initialized({6, 8, 4}, rng);
  const auto x = random_input(rng, 6, 32);
  const auto m = random_mask(rng, 4, 32);
  const auto c = net.forward(x, m);
  for (Eigen::Index b = 0; b < 32; ++b) {
    EXPECT_NEAR(c.probs.col(b).sum(), 1.0, 1e-12);
    for (Eigen::Index a = 0; a < 4; ++a) {
      if (m(a, b) == 0.0) {
        EXPECT_EQ(c.probs(a, b), 0.0);
      } else {
        EXPECT_GT(c.probs(a, b), 0.0);
        EXPECT_NEAR(std::exp(nn::log_prob(c.logits.col(b), a)), c.probs(a, b), 1e-12);
      }
    }
  }
}

TEST(Forward, ZeroPolicyHeadIsUniformOverAllowed) {
  Rng rng(2);
  const auto net = Net::initialized({5, 8, 4}, rng, true);
  Net::Mat m(4, 1);
  m << 1, 0, 1, 1;
  const auto c = net.forward(random_input(rng, 5, 1), m);
  EXPECT_NEAR(c.probs(0, 0), 1.0 / 3, 1e-12);
  EXPECT_EQ(c.probs(1, 0), 0.0);
}

TEST(Forward, FloatAndDoubleAgree) {
  Rng rng(3);
  const auto d = Net::initialized({7, 16, 5}, rng);
  nn::PolicyNetwork<float> f(d.shape());
  f.params() = d.params().cast<float>();
  const auto x = random_input(rng, 7, 4);
  const auto m = random_mask(rng, 5, 4);
  const auto cd = d.forward(x, m);
  const auto cf = f.forward(x.cast<float>(), m.cast<float>());
  EXPECT_LT((cd.probs - cf.probs.cast<double>()).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_LT((cd.values - cf.values.cast<double>()).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Backward, MatchesCentralDifferences) {
  Rng rng(4);
  auto net = Net::initialized({6, 8, 4}, rng);
  net.params() *= 3.0;  // move away from the near-linear regime
  const auto x = random_input(rng, 6, 5);
  const Net::Mat m = Net::Mat::Ones(4, 5);
  const Net::Mat w_logits = random_input(rng, 4, 5);
  const Net::Vec w_values = random_input(rng, 5, 1);
  auto objective = [&](const Net& n) {
    const auto c = n.forward(x, m);
    return (c.logits.cwiseProduct(w_logits)).sum() + c.values.dot(w_values);
  };
  const auto cache = net.forward(x, m);
  const Net::Vec grad = net.backward(cache, w_logits, w_values);
  const double h = 1e-6;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < net.params().size(); ++i) {
    Net plus = net, minus = net;
    plus.params()[i] += h;
    minus.params()[i] -= h;
    const double numeric = (objective(plus) - objective(minus)) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-6});
    worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Adam, StepsAgainstGradient) {
  Net::Vec p = Net::Vec::Zero(3);
  nn::Adam<double> opt(3, 0.1);
  Net::Vec g(3);
  g << 2.0, -0.5, 0.0;
  opt.step(p, g);
  EXPECT_NEAR(p[0], -0.1, 1e-5);
  EXPECT_NEAR(p[1], 0.1, 1e-5);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Adam, MinimizesQuadratic) {
  Net::Vec p(2);
  p << 3.0, -2.0;
  nn::Adam<double> opt(2, 0.05);
  for (int i = 0; i < 2000; ++i) {
    const Net::Vec g = 2.0 * p;
    opt.step(p, g);
  }
  EXPECT_LT(p.norm(), 1e-2);
}
