#include "mcsched/speed.hpp"

#include <algorithm>

#include "mcsched/env.hpp"
#include "mcsched/sched_math.hpp"

namespace mcsched {

std::vector<bool> replay_order(const Instance& instance, const std::vector<std::size_t>& order,
                               double speed) {
  std::vector<bool> done(instance.size(), false);
  Tick free_at = 0;
  for (std::size_t id : order) {
    const Job& j = instance.jobs.at(id);
    const Tick start = std::max(free_at, j.release);
    if (start >= j.deadline) continue;
    const Tick end = start + ticks_to_finish(static_cast<double>(j.processing), speed);
    if (end <= j.deadline) {
      done[id] = true;
      free_at = end;
    } else {
      free_at = j.deadline;
    }
  }
  return done;
}

std::vector<std::size_t> kept_jobs(const Instance& instance, const ScheduleTrace& trace, KeepSet keep) {
  std::vector<std::size_t> kept;
  for (const auto& e : trace.events) {
    const Job& j = instance.jobs.at(e.job);
    if (j.dummy || e.outcome != Outcome::Completed || e.end > j.deadline) continue;
    if (keep == KeepSet::HiOnly && !j.is_hi()) continue;
    kept.push_back(e.job);
  }
  return kept;
}

double min_tolerable_speed(const Instance& instance, const ScheduleTrace& trace, KeepSet keep,
                           double tolerance) {
  const auto kept = kept_jobs(instance, trace, keep);
  if (kept.empty()) return tolerance;
  const auto order = trace.start_order();
  auto feasible = [&](double s) {
    const auto done = replay_order(instance, order, s);
    return std::all_of(kept.begin(), kept.end(), [&](std::size_t id) { return done[id]; });
  };
  if (!feasible(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;  // lo infeasible (or zero), hi feasible
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

ScheduleTrace criticality_edf_schedule(const Instance& instance) {
  ScheduleTrace trace;
  std::vector<bool> taken(instance.size(), false);
  std::size_t open = 0;
  for (const auto& j : instance.jobs)
    if (!j.dummy) ++open;
  Tick now = 0;
  const Tick horizon = instance.horizon();
  while (open > 0 && now < horizon) {
    const Job* best = nullptr;
    for (const auto& j : instance.jobs) {
      if (j.dummy || taken[j.id] || j.release > now || now + j.processing > j.deadline) continue;
      if (!best || (j.is_hi() != best->is_hi() ? j.is_hi() : edf_before(j, *best))) best = &j;
    }
    if (!best) {
      ++now;
      trace.speeds.push_back(1.0);
      continue;
    }
    taken[best->id] = true;
    --open;
    trace.events.push_back({best->id, now, now + best->processing, Outcome::Completed,
                            best->criticality, best->deadline});
    trace.speeds.insert(trace.speeds.end(), static_cast<std::size_t>(best->processing), 1.0);
    now += best->processing;
  }
  return trace;
}

double degradation_floor(const Instance& instance) {
  const double s = min_tolerable_speed(instance, criticality_edf_schedule(instance), KeepSet::HiOnly);
  return std::clamp(s, DegradationConfig::kMinFloor, 1.0);
}

}  // namespace mcsched
