#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mcsched/core.hpp"
#include "mcsched/rng.hpp"

namespace mcsched {

/// Per-tick degradation: with probability `threshold` the tick runs at a
/// speed drawn uniformly from [floor, 1), otherwise at full speed.
struct DegradationConfig {
  double threshold = 0.0;
  double floor = 0.5;
  /// When set, reset() replaces `floor` with the instance's HI-preserving
  /// minimum tolerable speed, clamped to [kMinFloor, 1].
  bool per_instance_floor = false;

  static constexpr double kMinFloor = 0.05;
  /// Range of the per-episode threshold draw during training.
  static constexpr double kEpisodeThresholdLo = 0.05;
  static constexpr double kEpisodeThresholdHi = 0.95;

  void validate() const;
  bool operator==(const DegradationConfig&) const = default;
};

/// Columns of a per-job observation row.
enum class JobFeature : std::size_t {
  Release = 0,
  Deadline,
  Processing,
  Remaining,
  Laxity,
  LaxityRank,
  IsHi,
  Released,
  Executed,
  Starved,
  Running,
};
inline constexpr std::size_t kJobFeatures = 11;

enum class GlobalFeature : std::size_t { Now = 0, Speed, Threshold };
inline constexpr std::size_t kGlobalFeatures = 3;

inline constexpr std::size_t observation_size(std::size_t n_max) {
  return n_max * kJobFeatures + kGlobalFeatures;
}

/// Flattened observation: job rows by id, then the global row. Time-like
/// fields are divided by the horizon, ranks by n_max.
struct Observation {
  std::size_t n_max = 0;
  std::vector<double> values;

  double job(std::size_t i, JobFeature f) const {
    return values[i * kJobFeatures + static_cast<std::size_t>(f)];
  }
  double global(GlobalFeature f) const {
    return values[n_max * kJobFeatures + static_cast<std::size_t>(f)];
  }

  bool operator==(const Observation&) const = default;
};

/// One bit per job plus a trailing idle bit.
struct ActionMask {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  std::size_t idle_action() const { return bits.size() - 1; }
  bool allowed(std::size_t a) const { return a < bits.size() && bits[a] != 0; }
  std::size_t count() const;
  std::vector<std::size_t> allowed_actions() const;
  std::vector<bool> as_bools() const { return {bits.begin(), bits.end()}; }

  bool operator==(const ActionMask&) const = default;
};

/// Raised when a policy picks an action whose mask bit is clear.
class MaskedActionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct EnvState {
  Instance instance;
  Tick now = 0;
  double speed = 1.0;  // speed of the tick starting at `now`
  DegradationConfig degradation;
  Rng rng;
  ScheduleTrace trace;
};

/// Draws the speed of the next tick and advances the generator.
double sample_speed(EnvState& state);

ActionMask action_mask(const EnvState& state);

/// Lower median of runtime laxities over actionable jobs. Requires at least one.
double dynamic_laxity_threshold(const EnvState& state);

Observation encode_observation(const EnvState& state);

/// Reward for choosing job `j` at the current decision point.
double band_reward(const EnvState& state, std::size_t j);

struct RewardTable {
  static constexpr double kNearHi = 4.0;
  static constexpr double kNearLo = 3.0;
  static constexpr double kFarHi = 2.0;
  static constexpr double kFarLo = 1.0;
  static constexpr double kStarvedHi = -5.0;
  static constexpr double kStarvedLo = -1.0;
};

struct StepResult {
  Observation observation;
  ActionMask mask;
  double reward = 0.0;
  bool done = false;
};

/// Offline non-preemptive dual-criticality scheduling MDP.
///
/// Decisions happen only while the processor is idle; a chosen job runs
/// tick by tick until it completes or hits its deadline, with the speed
/// of each tick drawn from the degradation model.
class SchedulingEnv {
 public:
  StepResult reset(Instance instance, const DegradationConfig& degradation, std::uint64_t seed);
  StepResult step(std::size_t action);

  const EnvState& state() const { return state_; }
  const Instance& instance() const { return state_.instance; }
  const ScheduleTrace& trace() const { return state_.trace; }
  const ActionMask& mask() const { return mask_; }
  Tick now() const { return state_.now; }
  bool done() const { return done_; }
  std::size_t n_max() const { return state_.instance.size(); }

 private:
  void refresh_statuses();
  bool all_resolved() const;
  StepResult emit(double reward);

  EnvState state_;
  ActionMask mask_;
  bool done_ = true;
};

}  // namespace mcsched
