#pragma once

#include <vector>

#include "mcsched/core.hpp"

namespace mcsched {

enum class KeepSet { HiOnly, All };

inline constexpr double kSpeedTolerance = 1e-3;

/// Re-runs a fixed start order non-preemptively at constant `speed`.
/// Each job starts at max(processor free, release); a job whose deadline
/// has already passed is skipped, and a running job is aborted at its
/// deadline. Returns, per job id, whether it completed on time.
std::vector<bool> replay_order(const Instance& instance, const std::vector<std::size_t>& order,
                               double speed);

/// Jobs the speed search must keep: those of the kept class that the
/// reference trace completed on time.
std::vector<std::size_t> kept_jobs(const Instance& instance, const ScheduleTrace& trace, KeepSet keep);

/// Smallest constant speed in (0, 1] at which the trace's start order still
/// completes every kept job, found by bisection to `tolerance`. Returns 1 if
/// speed 1 already fails and `tolerance` if nothing is kept.
double min_tolerable_speed(const Instance& instance, const ScheduleTrace& trace, KeepSet keep,
                           double tolerance = kSpeedTolerance);

/// HI-first EDF at speed 1 under the environment's starvation rule.
ScheduleTrace criticality_edf_schedule(const Instance& instance);

/// Lowest degraded speed that keeps the HI jobs of the HI-first EDF
/// schedule on time, clamped to [0.05, 1].
double degradation_floor(const Instance& instance);

}  // namespace mcsched
