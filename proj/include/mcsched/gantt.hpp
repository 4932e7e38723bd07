#pragma once

#include <string>

#include "mcsched/core.hpp"

namespace mcsched {

/// Renders a schedule trace as a standalone SVG Gantt chart: one row per
/// job event, HI and LO in distinct colors, aborted events hatched with a
/// marker at the deadline, degraded ticks shaded by how slow they ran.
/// Output bytes depend only on the trace.
std::string render_gantt_svg(const ScheduleTrace& trace);

}  // namespace mcsched
