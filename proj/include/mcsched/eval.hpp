#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mcsched/core.hpp"
#include "mcsched/datagen.hpp"
#include "mcsched/env.hpp"
#include "mcsched/policies.hpp"
#include "mcsched/speed.hpp"

namespace mcsched {

/// Outcome of one evaluated instance. Dummy jobs are not counted.
struct InstanceResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::size_t hi_jobs = 0;
  std::size_t completed = 0;
  std::size_t completed_hi = 0;
  double reward = 0.0;
  double min_speed_hi = 1.0;
  double min_speed_all = 1.0;

  std::size_t missed() const { return jobs - completed; }
  std::size_t missed_hi() const { return hi_jobs - completed_hi; }
  bool operator==(const InstanceResult&) const = default;
};

struct MetricsReport {
  /// Mean per-instance HI completion rate (instances without HI jobs are skipped).
  double hi_completion_rate = 0.0;
  /// Mean per-instance completion rate.
  double overall_completion_rate = 0.0;
  double avg_missed_hi = 0.0;
  double avg_missed_overall = 0.0;
  double mean_reward = 0.0;
  /// Mean minimum tolerable speed keeping the completed HI jobs on time.
  double mean_min_speed_hi = 0.0;
  double mean_min_speed_all = 0.0;
  std::size_t n_instances = 0;

  std::string policy;
  DegradationConfig degradation;
  std::vector<InstanceResult> instances;

  bool operator==(const MetricsReport&) const = default;
};

/// Tallies one finished episode.
InstanceResult score_episode(const Instance& final_state, const ScheduleTrace& trace, double reward);

/// Aggregates per-instance results into rates and means.
MetricsReport aggregate(std::vector<InstanceResult> results);

/// Rolls out `policy` once per instance with the matching environment seed.
/// Stochastic policies draw from a generator seeded by the same seed.
/// When `traces` is non-null it receives one trace per instance.
MetricsReport evaluate(Policy& policy, const std::vector<Instance>& instances, const DegradationConfig& degradation,
                       const std::vector<std::uint64_t>& seeds, std::vector<ScheduleTrace>* traces = nullptr);

struct SweepOptions {
  GenParams gen;                       // n, means; lo_fraction/seed overridden per point
  std::size_t episodes_per_point = 1000;
  std::uint64_t seed = 0;              // instance i of every point uses seed + i
  DegradationConfig degradation;       // threshold overridden by sweep_degradation
  std::size_t n_max = 0;               // pad to this many slots (0 = no padding)
};

struct SweepRow {
  double grid_value = 0.0;
  MetricsReport report;
};

struct SweepTable {
  std::string parameter;  // "lo_fraction" or "degradation_threshold"
  std::vector<SweepRow> rows;
};

/// The shared instance set of a sweep point: seeds seed..seed+k-1 at `lo`.
std::vector<Instance> sweep_instances(const SweepOptions& opts, double lo);
std::vector<std::uint64_t> sweep_seeds(const SweepOptions& opts);

SweepTable sweep_lo(Policy& policy, const std::vector<double>& lo_grid, const SweepOptions& opts);
SweepTable sweep_degradation(Policy& policy, const std::vector<double>& threshold_grid, const SweepOptions& opts);

/// True when overall completion rises by more than `band` between adjacent rows.
bool trend_violation(const SweepTable& table, double band = 0.02);

struct BruteForceResult {
  std::vector<std::size_t> order;
  std::size_t completed_hi = 0;
  std::size_t completed = 0;
};

inline constexpr std::size_t kBruteForceMaxJobs = 8;

/// Exhaustive search over on-time start orders at speed 1 (idling allowed
/// until a job's release). Maximizes HI completions, then total completions.
BruteForceResult brute_force_best_schedule(const Instance& instance);

/// "edf", "crit-edf", "priority", "random", or "checkpoint:<path>".
std::unique_ptr<Policy> make_policy(const std::string& spec);

// Report writers. Numbers are printed with fixed precision so output is byte-stable.
std::string report_to_csv(const MetricsReport& report);
std::string report_to_json(const MetricsReport& report, const std::string& config_json);
std::string sweep_to_csv(const SweepTable& table);

}  // namespace mcsched
