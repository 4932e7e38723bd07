#pragma once

#include <memory>
#include <string>

#include "mcsched/env.hpp"
#include "mcsched/rng.hpp"

namespace mcsched {

/// Maps an observation and mask to an allowed action.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::size_t act(const Observation& obs, const ActionMask& mask, Rng& rng) = 0;
  virtual std::string name() const = 0;
  virtual bool deterministic() const = 0;
};

// Baseline rules. Each returns the idle action iff no job bit is set.

/// Earliest deadline among allowed jobs.
std::size_t edf_action(const Observation& obs, const ActionMask& mask);
/// Earliest-deadline HI job, else earliest-deadline LO job.
std::size_t criticality_edf_action(const Observation& obs, const ActionMask& mask);
/// First non-empty class of near-HI, near-LO, far-HI, far-LO; EDF inside a class.
std::size_t priority_action(const Observation& obs, const ActionMask& mask);
/// Uniform over allowed actions.
std::size_t random_action(const ActionMask& mask, Rng& rng);

/// Median-laxity split recomputed from the observation (normalized units).
double observed_laxity_threshold(const Observation& obs);

std::unique_ptr<Policy> make_edf_policy();
std::unique_ptr<Policy> make_criticality_edf_policy();
std::unique_ptr<Policy> make_priority_policy();
std::unique_ptr<Policy> make_random_policy();

struct EpisodeResult {
  double total_reward = 0.0;
  std::size_t steps = 0;
  ScheduleTrace trace;
  Instance final_instance;  // runtime flags at episode end
};

/// Runs one episode to completion. `policy_rng` feeds stochastic policies.
EpisodeResult run_episode(SchedulingEnv& env, Policy& policy, const Instance& instance,
                          const DegradationConfig& degradation, std::uint64_t env_seed,
                          Rng& policy_rng);

}  // namespace mcsched
