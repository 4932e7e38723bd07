#include "mcsched/policies.hpp"

#include <algorithm>
#include <tuple>
#include <vector>

namespace mcsched {

namespace {

bool observed_actionable(const Observation& obs, std::size_t i) {
  return obs.job(i, JobFeature::Released) > 0.5 && obs.job(i, JobFeature::Executed) < 0.5 &&
         obs.job(i, JobFeature::Starved) < 0.5 && obs.job(i, JobFeature::Running) < 0.5;
}

/// Best allowed job under a lexicographic key; idle if none.
template <typename Key>
std::size_t pick(const Observation& obs, const ActionMask& mask, Key key) {
  std::size_t best = mask.idle_action();
  for (std::size_t i = 0; i < obs.n_max; ++i) {
    if (!mask.allowed(i)) continue;
    if (best == mask.idle_action() || key(i) < key(best)) best = i;
  }
  return best;
}

class FnPolicy final : public Policy {
 public:
  using Fn = std::size_t (*)(const Observation&, const ActionMask&);
  FnPolicy(std::string name, Fn fn) : name_(std::move(name)), fn_(fn) {}
  std::size_t act(const Observation& obs, const ActionMask& mask, Rng&) override { return fn_(obs, mask); }
  std::string name() const override { return name_; }
  bool deterministic() const override { return true; }

 private:
  std::string name_;
  Fn fn_;
};

class RandomPolicy final : public Policy {
 public:
  std::size_t act(const Observation&, const ActionMask& mask, Rng& rng) override {
    return random_action(mask, rng);
  }
  std::string name() const override { return "random"; }
  bool deterministic() const override { return false; }
};

}  // namespace

std::size_t edf_action(const Observation& obs, const ActionMask& mask) {
  return pick(obs, mask, [&](std::size_t i) { return std::make_tuple(obs.job(i, JobFeature::Deadline), i); });
}

std::size_t criticality_edf_action(const Observation& obs, const ActionMask& mask) {
  return pick(obs, mask, [&](std::size_t i) {
    return std::make_tuple(obs.job(i, JobFeature::IsHi) > 0.5 ? 0 : 1, obs.job(i, JobFeature::Deadline), i);
  });
}

double observed_laxity_threshold(const Observation& obs) {
  std::vector<double> lax;
  for (std::size_t i = 0; i < obs.n_max; ++i)
    if (observed_actionable(obs, i)) lax.push_back(obs.job(i, JobFeature::Laxity));
  if (lax.empty()) return 0.0;
  const auto mid = lax.begin() + static_cast<std::ptrdiff_t>((lax.size() - 1) / 2);
  std::nth_element(lax.begin(), mid, lax.end());
  return *mid;
}

std::size_t priority_action(const Observation& obs, const ActionMask& mask) {
  const double threshold = observed_laxity_threshold(obs);
  return pick(obs, mask, [&](std::size_t i) {
    const bool near = obs.job(i, JobFeature::Laxity) <= threshold;
    const bool hi = obs.job(i, JobFeature::IsHi) > 0.5;
    const int cls = near ? (hi ? 0 : 1) : (hi ? 2 : 3);
    return std::make_tuple(cls, obs.job(i, JobFeature::Deadline), i);
  });
}

std::size_t random_action(const ActionMask& mask, Rng& rng) {
  const auto allowed = mask.allowed_actions();
  return allowed[rng.index(allowed.size())];
}

std::unique_ptr<Policy> make_edf_policy() { return std::make_unique<FnPolicy>("edf", &edf_action); }
std::unique_ptr<Policy> make_criticality_edf_policy() {
  return std::make_unique<FnPolicy>("crit-edf", &criticality_edf_action);
}
std::unique_ptr<Policy> make_priority_policy() {
  return std::make_unique<FnPolicy>("priority", &priority_action);
}
std::unique_ptr<Policy> make_random_policy() { return std::make_unique<RandomPolicy>(); }

EpisodeResult run_episode(SchedulingEnv& env, Policy& policy, const Instance& instance,
                          const DegradationConfig& degradation, std::uint64_t env_seed,
                          Rng& policy_rng) {
  EpisodeResult result;
  StepResult sr = env.reset(instance, degradation, env_seed);
  while (!sr.done) {
    const std::size_t action = policy.act(sr.observation, sr.mask, policy_rng);
    sr = env.step(action);
    result.total_reward += sr.reward;
    ++result.steps;
  }
  result.trace = env.trace();
  result.final_instance = env.instance();
  return result;
}

}  // namespace mcsched
