#include "mcsched/ppo.hpp"

#include <numeric>

#include "mcsched/datagen.hpp"

namespace mcsched::ppo {

void PpoHyper::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidInput("gamma must lie in [0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw InvalidInput("gae lambda must lie in [0, 1]");
  if (!(clip_epsilon > 0.0)) throw InvalidInput("clip epsilon must be positive");
  if (!(learning_rate > 0.0)) throw InvalidInput("learning rate must be positive");
  if (rollout_length == 0 || minibatch_size == 0 || epochs == 0)
    throw InvalidInput("rollout length, minibatch size and epochs must be positive");
  if (!(max_grad_norm > 0.0)) throw InvalidInput("max grad norm must be positive");
  if (hidden == 0) throw InvalidInput("hidden width must be positive");
}

Advantages gae(const std::vector<double>& rewards, const std::vector<double>& values,
               const std::vector<bool>& dones, double bootstrap_value, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw std::invalid_argument("gae: rewards, values and dones must have equal length");
  Advantages out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = bootstrap_value;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[k] = next_adv;
    out.returns[k] = next_adv + values[k];
    next_value = values[k];
  }
  return out;
}

LossBreakdown ppo_update(nn::PolicyNetwork<float>& net, nn::Adam<float>& opt, const Rollout& rollout,
                         const PpoHyper& hyper, Rng& rng) {
  const std::size_t n = rollout.actions.size();
  const auto adv = gae(rollout.rewards, rollout.values, rollout.dones, rollout.bootstrap_value,
                       hyper.gamma, hyper.gae_lambda);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  LossBreakdown mean;
  std::size_t batches = 0;
  Batch<float> batch;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (std::size_t begin = 0; begin < n; begin += hyper.minibatch_size) {
      const std::size_t end = std::min(n, begin + hyper.minibatch_size);
      const auto m = static_cast<Eigen::Index>(end - begin);
      batch.obs.resize(rollout.obs.rows(), m);
      batch.mask.resize(rollout.mask.rows(), m);
      batch.actions.resize(static_cast<std::size_t>(m));
      batch.old_log_prob.resize(m);
      batch.advantages.resize(m);
      batch.returns.resize(m);
      for (Eigen::Index c = 0; c < m; ++c) {
        const std::size_t k = order[begin + static_cast<std::size_t>(c)];
        const auto col = static_cast<Eigen::Index>(k);
        batch.obs.col(c) = rollout.obs.col(col);
        batch.mask.col(c) = rollout.mask.col(col);
        batch.actions[static_cast<std::size_t>(c)] = rollout.actions[k];
        batch.old_log_prob[c] = static_cast<float>(rollout.log_probs[k]);
        batch.advantages[c] = static_cast<float>(adv.advantages[k]);
        batch.returns[c] = static_cast<float>(adv.returns[k]);
      }
      const auto loss = ppo_minibatch_step(net, opt, batch, hyper);
      mean.policy += loss.policy;
      mean.value += loss.value;
      mean.entropy += loss.entropy;
      mean.total += loss.total;
      mean.clip_fraction += loss.clip_fraction;
      mean.grad_norm += loss.grad_norm;
      ++batches;
    }
  }
  if (batches > 0) {
    const double k = static_cast<double>(batches);
    mean.policy /= k;
    mean.value /= k;
    mean.entropy /= k;
    mean.total /= k;
    mean.clip_fraction /= k;
    mean.grad_norm /= k;
  }
  return mean;
}

EpisodeSource synthetic_episodes(GenParams base, std::size_t n_max, bool degrade, bool per_instance_floor,
                                 double floor) {
  base.validate();
  if (base.n > n_max) throw InvalidInput("synthetic episodes: n exceeds n_max");
  return [=](Rng& rng) {
    GenParams p = base;
    p.lo_fraction = rng.uniform(0.0, GenParams::max_lo_fraction(p.n));
    p.seed = rng.next();
    EpisodeSpec spec;
    spec.instance = pad_instance(generate_instance(p), n_max);
    spec.degradation.floor = floor;
    spec.degradation.per_instance_floor = per_instance_floor;
    spec.degradation.threshold =
        degrade ? rng.uniform(DegradationConfig::kEpisodeThresholdLo, DegradationConfig::kEpisodeThresholdHi)
                : 0.0;
    spec.env_seed = rng.next();
    return spec;
  };
}

std::size_t sample_action(const Eigen::VectorXf& probs, const ActionMask& mask, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t chosen = mask.idle_action();
  // Rounding leftovers fall on the last allowed action.
  for (std::size_t a = 0; a < mask.size(); ++a) {
    if (!mask.allowed(a)) continue;
    chosen = a;
    acc += static_cast<double>(probs[static_cast<Eigen::Index>(a)]);
    if (u < acc) break;
  }
  if (!mask.allowed(chosen)) throw MaskedActionError("sampled a masked action");
  return chosen;
}

namespace {

void store_observation(Eigen::MatrixXf& dst, Eigen::Index col, const Observation& obs) {
  for (std::size_t i = 0; i < obs.values.size(); ++i)
    dst(static_cast<Eigen::Index>(i), col) = static_cast<float>(obs.values[i]);
}

void store_mask(Eigen::MatrixXf& dst, Eigen::Index col, const ActionMask& mask) {
  for (std::size_t i = 0; i < mask.size(); ++i) dst(static_cast<Eigen::Index>(i), col) = mask.bits[i];
}

}  // namespace

TrainResult train(const EpisodeSource& source, std::size_t n_max, const PpoHyper& hyper, std::uint64_t seed,
                  const std::function<void(const TrainProgress&)>& on_update) {
  hyper.validate();
  Rng rng(seed);
  Rng episode_rng(rng.next());
  Rng action_rng(rng.next());

  const nn::NetworkShape shape{observation_size(n_max), hyper.hidden, n_max + 1};
  TrainResult result;
  result.network = nn::PolicyNetwork<float>::initialized(shape, rng);
  nn::Adam<float> opt(shape.parameter_count(), hyper.learning_rate);

  SchedulingEnv env;
  auto start_episode = [&] {
    auto spec = source(episode_rng);
    if (spec.instance.size() != n_max)
      throw InvalidInput("episode source produced " + std::to_string(spec.instance.size()) +
                         " job slots, expected n_max=" + std::to_string(n_max));
    return env.reset(std::move(spec.instance), spec.degradation, spec.env_seed);
  };
  StepResult sr = start_episode();
  double episode_reward = 0.0;

  Rollout rollout;
  Eigen::MatrixXf x(shape.input, 1), m(shape.actions, 1);
  std::uint64_t step = 0;
  while (step < hyper.total_steps) {
    const auto len = static_cast<std::size_t>(
        std::min<std::uint64_t>(hyper.rollout_length, hyper.total_steps - step));
    rollout.obs.resize(static_cast<Eigen::Index>(shape.input), static_cast<Eigen::Index>(len));
    rollout.mask.resize(static_cast<Eigen::Index>(shape.actions), static_cast<Eigen::Index>(len));
    rollout.actions.assign(len, 0);
    rollout.log_probs.assign(len, 0.0);
    rollout.values.assign(len, 0.0);
    rollout.rewards.assign(len, 0.0);
    rollout.dones.assign(len, false);
    double finished_sum = 0.0;
    std::size_t finished = 0;

    for (std::size_t t = 0; t < len; ++t) {
      const auto col = static_cast<Eigen::Index>(t);
      store_observation(rollout.obs, col, sr.observation);
      store_mask(rollout.mask, col, sr.mask);
      x = rollout.obs.col(col);
      m = rollout.mask.col(col);
      const auto cache = result.network.forward(x, m);
      const std::size_t a = sample_action(cache.probs.col(0), sr.mask, action_rng);
      rollout.actions[t] = a;
      rollout.log_probs[t] = nn::log_prob(cache.logits.col(0), static_cast<Eigen::Index>(a));
      rollout.values[t] = static_cast<double>(cache.values[0]);

      sr = env.step(a);
      ++step;
      rollout.rewards[t] = sr.reward;
      rollout.dones[t] = sr.done;
      episode_reward += sr.reward;
      if (sr.done) {
        result.episode_rewards.push_back({step, episode_reward});
        finished_sum += episode_reward;
        ++finished;
        episode_reward = 0.0;
        sr = start_episode();
      }
    }
    {
      store_observation(x, 0, sr.observation);
      store_mask(m, 0, sr.mask);
      rollout.bootstrap_value = static_cast<double>(result.network.forward(x, m).values[0]);
    }

    TrainProgress progress;
    progress.loss = ppo_update(result.network, opt, rollout, hyper, rng);
    progress.step = step;
    progress.episodes = result.episode_rewards.size();
    if (finished > 0) {
      progress.mean_reward = finished_sum / static_cast<double>(finished);
      result.update_curve.push_back({step, progress.mean_reward});
    }
    if (on_update) on_update(progress);
  }
  return result;
}

}  // namespace mcsched::ppo
