#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcsched/datagen.hpp"
#include "mcsched/env.hpp"
#include "mcsched/network.hpp"

namespace mcsched::ppo {

struct PpoHyper {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  std::size_t rollout_length = 2048;
  std::size_t minibatch_size = 64;
  std::size_t epochs = 10;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  std::uint64_t total_steps = 200'000;
  std::size_t hidden = 128;
  bool normalize_advantages = true;

  void validate() const;
  bool operator==(const PpoHyper&) const = default;
};

/// Raised when a loss or gradient turns non-finite; the update is skipped.
class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalized advantage estimation. `bootstrap_value` is V(s_T) for a
/// rollout cut mid-episode; it is ignored when the last step is terminal.
Advantages gae(const std::vector<double>& rewards, const std::vector<double>& values,
               const std::vector<bool>& dones, double bootstrap_value, double gamma, double lambda);

/// (a - mean) / (std + 1e-8), population std.
template <typename V>
void normalize_in_place(V& a) {
  const auto n = static_cast<double>(a.size());
  if (n == 0) return;
  double mean = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) mean += static_cast<double>(a[i]);
  mean /= n;
  double var = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) var += std::pow(static_cast<double>(a[i]) - mean, 2);
  const double sd = std::sqrt(var / n);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    a[i] = static_cast<typename V::Scalar>((static_cast<double>(a[i]) - mean) / (sd + 1e-8));
}

/// One training minibatch; columns are samples.
template <typename T>
struct Batch {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  Mat obs;   // input x B
  Mat mask;  // actions x B, 1 = allowed
  std::vector<std::size_t> actions;
  Vec old_log_prob;
  Vec advantages;
  Vec returns;

  std::size_t size() const { return actions.size(); }
};

struct LossBreakdown {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
};

/// Entropy of one masked distribution column, over allowed actions.
template <typename T, typename ColP, typename ColM>
double masked_entropy(const ColP& probs, const ColM& mask) {
  double h = 0.0;
  for (Eigen::Index a = 0; a < probs.size(); ++a) {
    const double p = static_cast<double>(probs[a]);
    if (mask[a] > T(0.5) && p > 0.0) h -= p * std::log(p);
  }
  return h;
}

/// Clipped-surrogate loss with value and entropy terms, averaged over the
/// batch. When `grad` is non-null it receives d(total)/d(params).
template <typename T>
LossBreakdown ppo_loss(const nn::PolicyNetwork<T>& net, const Batch<T>& batch, const PpoHyper& hyper,
                       typename nn::PolicyNetwork<T>::Vec* grad) {
  using Mat = typename nn::PolicyNetwork<T>::Mat;
  using Vec = typename nn::PolicyNetwork<T>::Vec;
  const auto B = static_cast<Eigen::Index>(batch.size());
  const auto cache = net.forward(batch.obs, batch.mask);

  Vec adv = batch.advantages;
  if (hyper.normalize_advantages) normalize_in_place(adv);

  Mat d_logits = Mat::Zero(cache.probs.rows(), B);
  Vec d_values = Vec::Zero(B);
  LossBreakdown out;
  const double inv_b = 1.0 / static_cast<double>(B);
  const double eps = hyper.clip_epsilon;
  std::size_t clipped = 0;

  for (Eigen::Index b = 0; b < B; ++b) {
    const auto a = static_cast<Eigen::Index>(batch.actions[static_cast<std::size_t>(b)]);
    const auto logits = cache.logits.col(b);
    const auto probs = cache.probs.col(b);
    const double log_p = nn::log_prob(logits, a);
    const double ratio = std::exp(log_p - static_cast<double>(batch.old_log_prob[b]));
    const double A = static_cast<double>(adv[b]);
    const double unclipped = ratio * A;
    const double clipped_obj = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * A;
    out.policy -= std::min(unclipped, clipped_obj) * inv_b;
    const bool active = unclipped <= clipped_obj;
    if (!active) ++clipped;

    const double v = static_cast<double>(cache.values[b]);
    const double err = v - static_cast<double>(batch.returns[b]);
    out.value += err * err * inv_b;

    const double h = masked_entropy<T>(probs, batch.mask.col(b));
    out.entropy += h * inv_b;

    if (grad) {
      // d(-ratio*A)/d(log_p) = -ratio*A on the active branch; d(log_p)/dz = e_a - p.
      const double g_logp = active ? -unclipped * inv_b : 0.0;
      for (Eigen::Index k = 0; k < probs.size(); ++k) {
        const double p = static_cast<double>(probs[k]);
        double dz = -g_logp * p;
        if (k == a) dz += g_logp;
        // d(-c_e * H)/dz_k = c_e * p_k * (log p_k + H)
        if (p > 0.0) dz += hyper.entropy_coef * p * (std::log(p) + h) * inv_b;
        d_logits(k, b) = static_cast<T>(dz);
      }
      d_values[b] = static_cast<T>(2.0 * hyper.value_coef * err * inv_b);
    }
  }
  out.total = out.policy + hyper.value_coef * out.value - hyper.entropy_coef * out.entropy;
  out.clip_fraction = static_cast<double>(clipped) * inv_b;
  if (grad) {
    *grad = net.backward(cache, d_logits, d_values);
    out.grad_norm = static_cast<double>(grad->norm());
  }
  return out;
}

/// Gradient step on one minibatch: loss, finiteness check, norm clip, Adam.
template <typename T>
LossBreakdown ppo_minibatch_step(nn::PolicyNetwork<T>& net, nn::Adam<T>& opt, const Batch<T>& batch,
                                 const PpoHyper& hyper) {
  typename nn::PolicyNetwork<T>::Vec grad;
  auto loss = ppo_loss(net, batch, hyper, &grad);
  if (!std::isfinite(loss.total) || !grad.allFinite())
    throw NonFiniteLoss("non-finite PPO loss (policy=" + std::to_string(loss.policy) +
                        ", value=" + std::to_string(loss.value) + ", entropy=" +
                        std::to_string(loss.entropy) + ")");
  if (loss.grad_norm > hyper.max_grad_norm) grad *= static_cast<T>(hyper.max_grad_norm / loss.grad_norm);
  opt.step(net.params(), grad);
  return loss;
}

/// Rollout storage for one update.
struct Rollout {
  using Mat = Eigen::MatrixXf;
  Mat obs;   // input x N
  Mat mask;  // actions x N
  std::vector<std::size_t> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<bool> dones;
  double bootstrap_value = 0.0;
};

/// Epochs of shuffled minibatch updates over a collected rollout. Returns
/// the mean loss breakdown over all minibatches.
LossBreakdown ppo_update(nn::PolicyNetwork<float>& net, nn::Adam<float>& opt, const Rollout& rollout,
                         const PpoHyper& hyper, Rng& rng);

/// One training episode: instance, degradation and environment seed.
struct EpisodeSpec {
  Instance instance;
  DegradationConfig degradation;
  std::uint64_t env_seed = 0;
};
using EpisodeSource = std::function<EpisodeSpec(Rng&)>;

/// Fresh synthetic instances: LO fraction ~ U(0, 1 - 2/n) per episode and,
/// when `degrade`, threshold ~ U(0.05, 0.95); padded to n_max.
EpisodeSource synthetic_episodes(GenParams base, std::size_t n_max, bool degrade,
                                 bool per_instance_floor = false, double floor = 0.5);

struct CurvePoint {
  std::uint64_t step = 0;
  double value = 0.0;
  bool operator==(const CurvePoint&) const = default;
};

struct TrainResult {
  nn::PolicyNetwork<float> network;
  std::vector<CurvePoint> episode_rewards;  // (env step at episode end, episode reward)
  std::vector<CurvePoint> update_curve;     // (env step, mean episode reward in that rollout)
};

struct TrainProgress {
  std::uint64_t step = 0;
  std::size_t episodes = 0;
  double mean_reward = 0.0;
  LossBreakdown loss;
};

TrainResult train(const EpisodeSource& source, std::size_t n_max, const PpoHyper& hyper,
                  std::uint64_t seed, const std::function<void(const TrainProgress&)>& on_update = {});

/// Samples from the masked distribution; throws MaskedActionError if the
/// draw lands on a cleared bit.
std::size_t sample_action(const Eigen::VectorXf& probs, const ActionMask& mask, Rng& rng);

}  // namespace mcsched::ppo
