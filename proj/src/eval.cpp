#include "mcsched/eval.hpp"

#include <cstdio>
#include <functional>

#include "json.hpp"
#include "mcsched/checkpoint.hpp"

namespace mcsched {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kPolicySeedSalt = 0x9E3779B97F4A7C15ULL;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

InstanceResult score_episode(const Instance& final_state, const ScheduleTrace& trace, double reward) {
  InstanceResult r;
  r.reward = reward;
  for (const auto& j : final_state.jobs) {
    if (j.dummy) continue;
    ++r.jobs;
    if (j.is_hi()) ++r.hi_jobs;
    if (j.completed_on_time()) {
      ++r.completed;
      if (j.is_hi()) ++r.completed_hi;
    }
  }
  r.min_speed_hi = min_tolerable_speed(final_state, trace, KeepSet::HiOnly);
  r.min_speed_all = min_tolerable_speed(final_state, trace, KeepSet::All);
  return r;
}

MetricsReport aggregate(std::vector<InstanceResult> results) {
  MetricsReport m;
  m.n_instances = results.size();
  std::size_t with_hi = 0;
  for (const auto& r : results) {
    if (r.hi_jobs > 0) {
      m.hi_completion_rate += static_cast<double>(r.completed_hi) / static_cast<double>(r.hi_jobs);
      ++with_hi;
    }
    if (r.jobs > 0) m.overall_completion_rate += static_cast<double>(r.completed) / static_cast<double>(r.jobs);
    m.avg_missed_hi += static_cast<double>(r.missed_hi());
    m.avg_missed_overall += static_cast<double>(r.missed());
    m.mean_reward += r.reward;
    m.mean_min_speed_hi += r.min_speed_hi;
    m.mean_min_speed_all += r.min_speed_all;
  }
  if (with_hi > 0) m.hi_completion_rate /= static_cast<double>(with_hi);
  if (!results.empty()) {
    const double n = static_cast<double>(results.size());
    m.overall_completion_rate /= n;
    m.avg_missed_hi /= n;
    m.avg_missed_overall /= n;
    m.mean_reward /= n;
    m.mean_min_speed_hi /= n;
    m.mean_min_speed_all /= n;
  }
  m.instances = std::move(results);
  return m;
}

MetricsReport evaluate(Policy& policy, const std::vector<Instance>& instances, const DegradationConfig& degradation,
                       const std::vector<std::uint64_t>& seeds, std::vector<ScheduleTrace>* traces) {
  if (seeds.size() != instances.size()) throw InvalidInput("evaluate: need exactly one seed per instance");
  std::vector<InstanceResult> results;
  results.reserve(instances.size());
  if (traces) traces->clear();
  SchedulingEnv env;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    Rng policy_rng(seeds[i] ^ kPolicySeedSalt);
    auto ep = run_episode(env, policy, instances[i], degradation, seeds[i], policy_rng);
    auto r = score_episode(ep.final_instance, ep.trace, ep.total_reward);
    r.index = i;
    r.seed = seeds[i];
    results.push_back(r);
    if (traces) traces->push_back(std::move(ep.trace));
  }
  auto report = aggregate(std::move(results));
  report.policy = policy.name();
  report.degradation = degradation;
  return report;
}

std::vector<std::uint64_t> sweep_seeds(const SweepOptions& opts) {
  std::vector<std::uint64_t> seeds(opts.episodes_per_point);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = (opts.seed + i) * kPolicySeedSalt + 1;
  return seeds;
}

std::vector<Instance> sweep_instances(const SweepOptions& opts, double lo) {
  std::vector<Instance> out;
  out.reserve(opts.episodes_per_point);
  for (std::size_t i = 0; i < opts.episodes_per_point; ++i) {
    GenParams p = opts.gen;
    p.lo_fraction = lo;
    p.seed = opts.seed + i;
    auto inst = generate_instance(p);
    out.push_back(opts.n_max > 0 ? pad_instance(std::move(inst), opts.n_max) : std::move(inst));
  }
  return out;
}

SweepTable sweep_lo(Policy& policy, const std::vector<double>& lo_grid, const SweepOptions& opts) {
  if (lo_grid.empty()) throw InvalidInput("sweep: grid is empty");
  SweepTable table{"lo_fraction", {}};
  const auto seeds = sweep_seeds(opts);
  for (double lo : lo_grid) table.rows.push_back({lo, evaluate(policy, sweep_instances(opts, lo), opts.degradation, seeds)});
  return table;
}

SweepTable sweep_degradation(Policy& policy, const std::vector<double>& threshold_grid, const SweepOptions& opts) {
  if (threshold_grid.empty()) throw InvalidInput("sweep: grid is empty");
  SweepTable table{"degradation_threshold", {}};
  const auto seeds = sweep_seeds(opts);
  const auto instances = sweep_instances(opts, opts.gen.lo_fraction);
  for (double t : threshold_grid) {
    DegradationConfig deg = opts.degradation;
    deg.threshold = t;
    table.rows.push_back({t, evaluate(policy, instances, deg, seeds)});
  }
  return table;
}

bool trend_violation(const SweepTable& table, double band) {
  for (std::size_t i = 1; i < table.rows.size(); ++i)
    if (table.rows[i].report.overall_completion_rate > table.rows[i - 1].report.overall_completion_rate + band)
      return true;
  return false;
}

BruteForceResult brute_force_best_schedule(const Instance& instance) {
  std::vector<std::size_t> ids;
  for (const auto& j : instance.jobs)
    if (!j.dummy) ids.push_back(j.id);
  if (ids.size() > kBruteForceMaxJobs)
    throw InvalidInput("brute force supports at most " + std::to_string(kBruteForceMaxJobs) + " jobs");

  BruteForceResult best;
  std::vector<std::size_t> current;
  std::vector<bool> used(instance.size(), false);
  std::function<void(Tick, std::size_t, std::size_t)> dfs = [&](Tick free_at, std::size_t hi, std::size_t total) {
    if (std::tie(hi, total) > std::tie(best.completed_hi, best.completed)) best = {current, hi, total};
    for (std::size_t id : ids) {
      if (used[id]) continue;
      const Job& j = instance.jobs[id];
      const Tick start = std::max(free_at, j.release);
      if (start + j.processing > j.deadline) continue;
      used[id] = true;
      current.push_back(id);
      dfs(start + j.processing, hi + (j.is_hi() ? 1 : 0), total + 1);
      current.pop_back();
      used[id] = false;
    }
  };
  dfs(0, 0, 0);
  return best;
}

std::unique_ptr<Policy> make_policy(const std::string& spec) {
  if (spec == "edf") return make_edf_policy();
  if (spec == "crit-edf") return make_criticality_edf_policy();
  if (spec == "priority") return make_priority_policy();
  if (spec == "random") return make_random_policy();
  const std::string prefix = "checkpoint:";
  if (spec.rfind(prefix, 0) == 0)
    return std::make_unique<NetworkPolicy>(load_checkpoint(spec.substr(prefix.size())), spec);
  throw InvalidInput("unknown policy '" + spec + "' (expected edf|crit-edf|priority|random|checkpoint:<path>)");
}

std::string report_to_csv(const MetricsReport& report) {
  std::string out = "instance,seed,jobs,hi_jobs,completed,completed_hi,missed,missed_hi,reward,min_speed_hi,min_speed_all\n";
  for (const auto& r : report.instances) {
    out += std::to_string(r.index) + "," + std::to_string(r.seed) + "," + std::to_string(r.jobs) + "," +
           std::to_string(r.hi_jobs) + "," + std::to_string(r.completed) + "," + std::to_string(r.completed_hi) + "," +
           std::to_string(r.missed()) + "," + std::to_string(r.missed_hi()) + "," + num(r.reward) + "," +
           num(r.min_speed_hi) + "," + num(r.min_speed_all) + "\n";
  }
  // Summary row: instance count under `jobs`, rates under the completion columns, means elsewhere.
  out += "summary,," + std::to_string(report.n_instances) + ",," + num(report.overall_completion_rate) + "," + num(report.hi_completion_rate) +
         "," + num(report.avg_missed_overall) + "," + num(report.avg_missed_hi) + "," + num(report.mean_reward) + "," +
         num(report.mean_min_speed_hi) + "," + num(report.mean_min_speed_all) + "\n";
  return out;
}

std::string report_to_json(const MetricsReport& report, const std::string& config_json) {
  Json doc;
  doc["config"] = config_json.empty() ? Json::object() : Json::parse(config_json);
  doc["policy"] = report.policy;
  doc["degradation"] = {{"threshold", report.degradation.threshold},
                        {"floor", report.degradation.floor},
                        {"per_instance_floor", report.degradation.per_instance_floor}};
  doc["n_instances"] = report.n_instances;
  doc["hi_completion_rate"] = report.hi_completion_rate;
  doc["overall_completion_rate"] = report.overall_completion_rate;
  doc["avg_missed_hi"] = report.avg_missed_hi;
  doc["avg_missed_overall"] = report.avg_missed_overall;
  doc["mean_reward"] = report.mean_reward;
  doc["speed"] = {{"mean_min_speed_hi", report.mean_min_speed_hi}, {"mean_min_speed_all", report.mean_min_speed_all}};
  Json rows = Json::array();
  for (const auto& r : report.instances) {
    rows.push_back({{"instance", r.index},       {"seed", r.seed},
                    {"jobs", r.jobs},            {"hi_jobs", r.hi_jobs},
                    {"completed", r.completed},  {"completed_hi", r.completed_hi},
                    {"reward", r.reward},        {"min_speed_hi", r.min_speed_hi},
                    {"min_speed_all", r.min_speed_all}});
  }
  doc["instances"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string sweep_to_csv(const SweepTable& table) {
  std::string out = table.parameter + ",hi_rate,overall_rate,missed_hi,missed_overall\n";
  for (const auto& row : table.rows) {
    const auto& r = row.report;
    out += num(row.grid_value) + "," + num(r.hi_completion_rate) + "," + num(r.overall_completion_rate) + "," +
           num(r.avg_missed_hi) + "," + num(r.avg_missed_overall) + "\n";
  }
  return out;
}

}  // namespace mcsched
