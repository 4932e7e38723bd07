#include "mcsched/core.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

namespace mcsched {

std::string_view to_string(Criticality c) { return c == Criticality::HI ? "HI" : "LO"; }

Criticality criticality_from_string(std::string_view s) {
  if (s == "HI") return Criticality::HI;
  if (s == "LO") return Criticality::LO;
  throw InvalidInput("unknown criticality '" + std::string(s) + "' (expected LO or HI)");
}

std::string_view to_string(Outcome o) { return o == Outcome::Completed ? "completed" : "aborted"; }

Job Job::make(std::size_t id, Tick release, Tick deadline, Tick processing,
              Criticality criticality) {
  Job j;
  j.id = id;
  j.release = release;
  j.deadline = deadline;
  j.processing = processing;
  j.criticality = criticality;
  j.remaining = static_cast<double>(processing);
  return j;
}

Tick Instance::horizon() const {
  Tick h = 0;
  for (const auto& j : jobs) h = std::max(h, j.deadline);
  return h;
}

std::size_t Instance::real_size() const {
  return static_cast<std::size_t>(
      std::count_if(jobs.begin(), jobs.end(), [](const Job& j) { return !j.dummy; }));
}

void Instance::validate() const {
  if (jobs.empty()) throw InvalidInput("instance has no jobs");
  if (lo_fraction < 0.0 || lo_fraction >= 1.0)
    throw InvalidInput("lo_fraction must lie in [0, 1)");
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& j = jobs[i];
    const std::string where = "job " + std::to_string(i);
    if (j.id != i) throw InvalidInput(where + ": ids must be 0..n-1 in order");
    if (j.release < 0) throw InvalidInput(where + ": negative release");
    if (j.processing <= 0) throw InvalidInput(where + ": processing must be positive");
    if (j.deadline <= j.release) throw InvalidInput(where + ": deadline must exceed release");
  }
}

void Instance::reset_runtime() {
  for (auto& j : jobs) {
    j.remaining = static_cast<double>(j.processing);
    j.started_at.reset();
    j.finished_at.reset();
    j.flags = {};
  }
}

std::vector<std::size_t> ScheduleTrace::start_order() const {
  std::vector<TraceEvent> sorted = events;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TraceEvent& a, const TraceEvent& b) { return a.start < b.start; });
  std::vector<std::size_t> order;
  order.reserve(sorted.size());
  for (const auto& e : sorted) order.push_back(e.job);
  return order;
}

void ScheduleTrace::validate() const {
  std::set<std::size_t> seen;
  std::vector<TraceEvent> sorted = events;
  std::sort(sorted.begin(), sorted.end(),
            [](const TraceEvent& a, const TraceEvent& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& e = sorted[i];
    if (e.end < e.start) throw InvalidInput("trace event ends before it starts");
    if (!seen.insert(e.job).second)
      throw InvalidInput("job " + std::to_string(e.job) + " appears twice in trace");
    if (i > 0 && sorted[i - 1].end > e.start) throw InvalidInput("trace events overlap");
    if (e.outcome == Outcome::Aborted && e.end != e.deadline)
      throw InvalidInput("aborted event must end at the job deadline");
  }
  for (double s : speeds)
    if (!(s > 0.0 && s <= 1.0)) throw InvalidInput("trace speed outside (0, 1]");
}

double laxity(const Job& job, Tick now) {
  return static_cast<double>(job.deadline - now) - job.remaining;
}

void update_status(Job& job, Tick now) {
  if (job.flags.executed) return;
  if (now >= job.release) job.flags.released = true;
  if (!job.flags.scheduled && now + job.processing > job.deadline) job.flags.starved = true;
  if (now >= job.deadline) job.flags.starved = true;
}

bool is_actionable(const Job& job) {
  const auto& f = job.flags;
  return !job.dummy && f.released && !f.executed && !f.starved && !f.scheduled;
}

std::vector<std::size_t> laxity_ranks(const std::vector<Job>& jobs, Tick now) {
  std::vector<std::size_t> ranks(jobs.size(), jobs.size());
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (is_actionable(jobs[i])) active.push_back(i);
  std::sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
    const double la = laxity(jobs[a], now);
    const double lb = laxity(jobs[b], now);
    return std::tie(la, jobs[a].deadline, jobs[a].id) < std::tie(lb, jobs[b].deadline, jobs[b].id);
  });
  for (std::size_t r = 0; r < active.size(); ++r) ranks[active[r]] = r;
  return ranks;
}

}  // namespace mcsched
