#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <vector>

#include "mcsched/core.hpp"

namespace mcsched {

struct GenParams {
  std::size_t n = 50;
  double lo_fraction = 0.3;
  double release_mean = 20.0;
  double processing_mean = 5.0;
  double slack_mean = 10.0;
  std::uint64_t seed = 0;

  /// Largest admissible LO fraction for n jobs: 1 - 2/n, floored at 0.
  static double max_lo_fraction(std::size_t n);
  void validate() const;
};

struct TraceIngestConfig {
  double scale_divisor = 1000.0;
  int criticality_threshold = 5;
  double slack_mean = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One raw row of a server trace.
struct TraceRow {
  double release_raw = 0.0;
  double processing_raw = 0.0;
  int criticality_raw = 0;
};

/// Exponential releases, WCETs and slack; then repaired so EDF completes everything.
Instance generate_instance(const GenParams& params);

/// Non-preemptive EDF at constant speed with no aborts. Late completions
/// stay in the trace.
ScheduleTrace simulate_edf(const Instance& instance, double speed = 1.0);

/// Raises every late deadline to its EDF finish time until EDF at speed 1
/// meets all deadlines.
Instance edf_repair(Instance instance);

/// Number of jobs EDF at speed 1 finishes after their deadline.
std::size_t edf_misses(const Instance& instance);

Instance ingest_trace(const std::vector<TraceRow>& rows, const TraceIngestConfig& cfg);

/// Parses a `release_time,processing_time,criticality[,instance_id]` CSV and
/// ingests one instance per instance_id (in order of first appearance), or a
/// single instance when the column is absent. Instance k uses seed cfg.seed + k.
std::vector<Instance> ingest_trace_csv(std::istream& csv, const TraceIngestConfig& cfg);
std::vector<Instance> ingest_trace_csv(const std::filesystem::path& path,
                                       const TraceIngestConfig& cfg);

/// Appends never-actionable dummy jobs up to `capacity`.
Instance pad_instance(Instance instance, std::size_t capacity);

}  // namespace mcsched
