#pragma once

#include <cmath>
#include <tuple>

#include "mcsched/core.hpp"

namespace mcsched {

/// Remaining work at or below this counts as finished.
inline constexpr double kWorkEpsilon = 1e-9;

/// Ticks a job with `work` units needs at constant `speed`.
inline Tick ticks_to_finish(double work, double speed) {
  return static_cast<Tick>(std::ceil(work / speed - kWorkEpsilon));
}

/// Earliest deadline first, ties to the lower id.
inline bool edf_before(const Job& a, const Job& b) {
  return std::tie(a.deadline, a.id) < std::tie(b.deadline, b.id);
}

}  // namespace mcsched
