#include "mcsched/env.hpp"

#include <algorithm>
#include <cmath>

#include "mcsched/sched_math.hpp"
#include "mcsched/speed.hpp"

namespace mcsched {

void DegradationConfig::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw InvalidInput("degradation threshold must lie in [0, 1]");
  if (!(floor > 0.0 && floor <= 1.0)) throw InvalidInput("degradation floor must lie in (0, 1]");
}

std::size_t ActionMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::vector<std::size_t> ActionMask::allowed_actions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out.push_back(i);
  return out;
}

double sample_speed(EnvState& state) {
  const auto& deg = state.degradation;
  if (state.rng.uniform() < deg.threshold) return deg.floor + (1.0 - deg.floor) * state.rng.uniform();
  return 1.0;
}

ActionMask action_mask(const EnvState& state) {
  const auto& jobs = state.instance.jobs;
  ActionMask mask;
  mask.bits.assign(jobs.size() + 1, 0);
  bool any_hi = false;
  bool any = false;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!is_actionable(jobs[i])) continue;
    mask.bits[i] = 1;
    any = true;
    any_hi = any_hi || jobs[i].is_hi();
  }
  if (state.speed < 1.0 && any_hi) {
    for (std::size_t i = 0; i < jobs.size(); ++i)
      if (!jobs[i].is_hi()) mask.bits[i] = 0;
  }
  if (!any) mask.bits.back() = 1;
  return mask;
}

double dynamic_laxity_threshold(const EnvState& state) {
  std::vector<double> lax;
  for (const auto& j : state.instance.jobs)
    if (is_actionable(j)) lax.push_back(laxity(j, state.now));
  if (lax.empty()) throw std::logic_error("dynamic_laxity_threshold: no actionable jobs");
  const auto mid = lax.begin() + static_cast<std::ptrdiff_t>((lax.size() - 1) / 2);
  std::nth_element(lax.begin(), mid, lax.end());
  return *mid;
}

double band_reward(const EnvState& state, std::size_t j) {
  const Job& job = state.instance.jobs.at(j);
  const bool near = laxity(job, state.now) <= dynamic_laxity_threshold(state);
  if (near) return job.is_hi() ? RewardTable::kNearHi : RewardTable::kNearLo;
  return job.is_hi() ? RewardTable::kFarHi : RewardTable::kFarLo;
}

Observation encode_observation(const EnvState& state) {
  const auto& jobs = state.instance.jobs;
  const std::size_t n = jobs.size();
  const double horizon = static_cast<double>(std::max<Tick>(1, state.instance.horizon()));
  const auto ranks = laxity_ranks(jobs, state.now);

  Observation obs;
  obs.n_max = n;
  obs.values.assign(observation_size(n), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Job& j = jobs[i];
    if (j.dummy) continue;
    double* row = obs.values.data() + i * kJobFeatures;
    auto set = [row](JobFeature f, double v) { row[static_cast<std::size_t>(f)] = v; };
    set(JobFeature::Release, static_cast<double>(j.release) / horizon);
    set(JobFeature::Deadline, static_cast<double>(j.deadline) / horizon);
    set(JobFeature::Processing, static_cast<double>(j.processing) / horizon);
    set(JobFeature::Remaining, j.remaining / horizon);
    set(JobFeature::Laxity, laxity(j, state.now) / horizon);
    set(JobFeature::LaxityRank, static_cast<double>(ranks[i]) / static_cast<double>(n));
    set(JobFeature::IsHi, j.is_hi() ? 1.0 : 0.0);
    set(JobFeature::Released, j.flags.released ? 1.0 : 0.0);
    set(JobFeature::Executed, j.flags.executed ? 1.0 : 0.0);
    set(JobFeature::Starved, j.flags.starved ? 1.0 : 0.0);
    set(JobFeature::Running, j.flags.scheduled && !j.flags.executed && !j.flags.starved ? 1.0 : 0.0);
  }
  double* global = obs.values.data() + n * kJobFeatures;
  global[static_cast<std::size_t>(GlobalFeature::Now)] = static_cast<double>(state.now) / horizon;
  global[static_cast<std::size_t>(GlobalFeature::Speed)] = state.speed;
  global[static_cast<std::size_t>(GlobalFeature::Threshold)] = state.degradation.threshold;
  return obs;
}

StepResult SchedulingEnv::reset(Instance instance, const DegradationConfig& degradation,
                                std::uint64_t seed) {
  instance.validate();
  degradation.validate();
  instance.reset_runtime();
  state_ = EnvState{};
  state_.degradation = degradation;
  if (degradation.per_instance_floor) {
    state_.degradation.floor = degradation_floor(instance);
    state_.degradation.per_instance_floor = false;
  }
  state_.instance = std::move(instance);
  state_.now = 0;
  state_.speed = 1.0;
  state_.rng = Rng(seed);
  refresh_statuses();
  done_ = all_resolved();
  return emit(0.0);
}

void SchedulingEnv::refresh_statuses() {
  for (auto& j : state_.instance.jobs) update_status(j, state_.now);
}

bool SchedulingEnv::all_resolved() const {
  return std::all_of(state_.instance.jobs.begin(), state_.instance.jobs.end(), [](const Job& j) {
    return j.dummy || j.flags.executed || j.flags.starved;
  });
}

StepResult SchedulingEnv::emit(double reward) {
  mask_ = action_mask(state_);
  return {encode_observation(state_), mask_, reward, done_};
}

StepResult SchedulingEnv::step(std::size_t action) {
  if (done_) throw std::logic_error("step called on a finished episode");
  if (!mask_.allowed(action))
    throw MaskedActionError("action " + std::to_string(action) + " is masked at t=" +
                            std::to_string(state_.now));
  auto& jobs = state_.instance.jobs;
  std::vector<bool> starved_before(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) starved_before[i] = jobs[i].flags.starved;
  state_.trace.decisions.push_back({state_.now, action, mask_.as_bools()});

  auto advance_tick = [this] {
    state_.trace.speeds.push_back(state_.speed);
    ++state_.now;
    state_.speed = sample_speed(state_);
  };

  double reward = 0.0;
  if (action == mask_.idle_action()) {
    advance_tick();
    refresh_statuses();
  } else {
    reward += band_reward(state_, action);
    Job& job = jobs[action];
    job.flags.scheduled = true;
    job.started_at = state_.now;
    for (;;) {
      job.remaining -= state_.speed;
      advance_tick();
      if (job.remaining <= kWorkEpsilon) {
        job.remaining = 0.0;
        job.flags.executed = true;
        job.finished_at = state_.now;
        state_.trace.events.push_back({job.id, *job.started_at, state_.now, Outcome::Completed,
                                       job.criticality, job.deadline});
        refresh_statuses();
        break;
      }
      refresh_statuses();
      if (job.flags.starved) {
        state_.trace.events.push_back({job.id, *job.started_at, job.deadline, Outcome::Aborted,
                                       job.criticality, job.deadline});
        break;
      }
    }
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (jobs[i].dummy || starved_before[i] || !jobs[i].flags.starved) continue;
    reward += jobs[i].is_hi() ? RewardTable::kStarvedHi : RewardTable::kStarvedLo;
  }
  done_ = all_resolved();
  return emit(reward);
}

}  // namespace mcsched
