#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcsched {

/// Discrete time, in processor ticks.
using Tick = std::int64_t;

enum class Criticality : std::uint8_t { LO = 0, HI = 1 };

std::string_view to_string(Criticality c);
Criticality criticality_from_string(std::string_view s);

/// Raised for malformed instances, traces, or parameters.
class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JobFlags {
  bool released = false;
  bool scheduled = false;
  bool executed = false;
  bool starved = false;

  bool operator==(const JobFlags&) const = default;
};

struct Job {
  std::size_t id = 0;
  Tick release = 0;
  Tick deadline = 1;
  Tick processing = 1;  // WCET in work units
  Criticality criticality = Criticality::HI;

  // Runtime state. Work is fractional because degraded ticks deliver
  // less than one unit.
  double remaining = 1.0;
  std::optional<Tick> started_at;
  std::optional<Tick> finished_at;
  JobFlags flags;

  // Padding job: never actionable, excluded from every metric.
  bool dummy = false;

  static Job make(std::size_t id, Tick release, Tick deadline, Tick processing,
                  Criticality criticality);

  bool is_hi() const { return criticality == Criticality::HI; }
  bool completed_on_time() const {
    return flags.executed && finished_at && *finished_at <= deadline;
  }

  bool operator==(const Job&) const = default;
};

enum class InstanceSource : std::uint8_t { Synthetic, Trace };

struct Instance {
  std::vector<Job> jobs;
  double lo_fraction = 0.0;
  std::uint64_t seed = 0;
  InstanceSource source = InstanceSource::Synthetic;

  /// Latest deadline over all jobs.
  Tick horizon() const;
  std::size_t size() const { return jobs.size(); }
  /// Number of non-dummy jobs.
  std::size_t real_size() const;

  /// Throws InvalidInput when ids, timing, or size constraints fail.
  void validate() const;

  /// Resets every job to its initial runtime state.
  void reset_runtime();

  bool operator==(const Instance&) const = default;
};

enum class Outcome : std::uint8_t { Completed, Aborted };

std::string_view to_string(Outcome o);

struct TraceEvent {
  std::size_t job = 0;
  Tick start = 0;
  Tick end = 0;
  Outcome outcome = Outcome::Completed;
  Criticality criticality = Criticality::HI;
  Tick deadline = 0;

  bool operator==(const TraceEvent&) const = default;
};

struct Decision {
  Tick time = 0;
  std::size_t action = 0;
  std::vector<bool> mask;

  bool operator==(const Decision&) const = default;
};

/// Executed timeline of one episode.
struct ScheduleTrace {
  std::string instance_ref;
  std::vector<TraceEvent> events;
  std::vector<double> speeds;  // one entry per elapsed tick
  std::vector<Decision> decisions;

  /// Job ids in start order.
  std::vector<std::size_t> start_order() const;

  /// Throws InvalidInput if events overlap or a job appears twice.
  void validate() const;

  bool operator==(const ScheduleTrace&) const = default;
};

/// deadline - now - remaining. Negative once the job cannot finish at full speed.
double laxity(const Job& job, Tick now);

/// Refreshes release/starvation flags for time `now`. Flags are monotone.
void update_status(Job& job, Tick now);

bool is_actionable(const Job& job);

/// Rank 0 is the smallest laxity among actionable jobs; ties go to the
/// earlier deadline, then the lower id. Non-actionable jobs get jobs.size().
std::vector<std::size_t> laxity_ranks(const std::vector<Job>& jobs, Tick now);

}  // namespace mcsched
