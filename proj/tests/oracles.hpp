#pragma once

// Reference implementations used only by tests. They are written
// independently of the library code they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "mcsched/core.hpp"
#include "mcsched/datagen.hpp"

namespace oracle {

using mcsched::Instance;
using mcsched::Job;
using mcsched::ScheduleTrace;
using mcsched::Tick;

/// Finish tick per job under non-preemptive EDF at speed 1 (no aborts).
inline std::vector<Tick> edf_finish_times(const Instance& inst) {
  std::vector<Tick> finish(inst.size(), -1);
  std::vector<const Job*> pending;
  for (const auto& j : inst.jobs) pending.push_back(&j);
  Tick t = 0;
  while (!pending.empty()) {
    auto best = pending.end();
    for (auto it = pending.begin(); it != pending.end(); ++it) {
      if ((*it)->release > t) continue;
      if (best == pending.end() || (*it)->deadline < (*best)->deadline ||
          ((*it)->deadline == (*best)->deadline && (*it)->id < (*best)->id))
        best = it;
    }
    if (best == pending.end()) {
      Tick next = (*pending.front()).release;
      for (const Job* j : pending) next = std::min(next, j->release);
      t = next;
      continue;
    }
    t += (*best)->processing;
    finish[(*best)->id] = t;
    pending.erase(best);
  }
  return finish;
}

/// Per-job on-time completion recomputed from the events and per-tick speeds
/// of a trace: each completed event must have delivered its full WCET in
/// [start, end) and no less before end - 1.
struct Recount {
  std::size_t completed = 0;
  std::size_t completed_hi = 0;
  bool consistent = true;
};

inline Recount recount(const Instance& inst, const ScheduleTrace& trace) {
  Recount r;
  for (const auto& e : trace.events) {
    if (e.outcome != mcsched::Outcome::Completed) continue;
    const Job& j = inst.jobs.at(e.job);
    double work = 0.0;
    for (Tick t = e.start; t < e.end; ++t) work += trace.speeds.at(static_cast<std::size_t>(t));
    const double last = trace.speeds.at(static_cast<std::size_t>(e.end - 1));
    if (work + 1e-9 < static_cast<double>(j.processing) || work - last >= static_cast<double>(j.processing) - 1e-9)
      r.consistent = false;
    if (e.end <= j.deadline) {
      ++r.completed;
      if (j.is_hi()) ++r.completed_hi;
    }
  }
  return r;
}

/// Fixed-order constant-speed replay with skip/abort semantics, computed in
/// continuous time and rounded up to whole ticks per job.
inline std::vector<bool> replay(const Instance& inst, const std::vector<std::size_t>& order, double s) {
  std::vector<bool> ok(inst.size(), false);
  Tick clock = 0;
  for (std::size_t id : order) {
    const Job& j = inst.jobs[id];
    Tick start = j.release > clock ? j.release : clock;
    if (start >= j.deadline) continue;
    const double exact = static_cast<double>(j.processing) / s;
    Tick dur = static_cast<Tick>(exact);
    if (static_cast<double>(dur) < exact - 1e-9) ++dur;
    if (start + dur <= j.deadline) {
      ok[id] = true;
      clock = start + dur;
    } else {
      clock = j.deadline;
    }
  }
  return ok;
}

inline mcsched::Instance make_instance(std::vector<Job> jobs) {
  Instance inst;
  inst.jobs = std::move(jobs);
  for (std::size_t i = 0; i < inst.jobs.size(); ++i) inst.jobs[i].id = i;
  inst.reset_runtime();
  return inst;
}

}  // namespace oracle
