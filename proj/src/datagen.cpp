#include "mcsched/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "mcsched/rng.hpp"
#include "mcsched/sched_math.hpp"

namespace mcsched {

double GenParams::max_lo_fraction(std::size_t n) {
  if (n == 0) return 0.0;
  return std::max(0.0, 1.0 - 2.0 / static_cast<double>(n));
}

void GenParams::validate() const {
  if (n == 0) throw InvalidInput("GenParams: n must be at least 1");
  if (!(lo_fraction >= 0.0) || lo_fraction > max_lo_fraction(n) + 1e-12)
    throw InvalidInput("GenParams: lo_fraction must lie in [0, 1 - 2/n]");
  if (!(release_mean > 0.0)) throw InvalidInput("GenParams: release_mean must be positive");
  if (!(processing_mean > 0.0)) throw InvalidInput("GenParams: processing_mean must be positive");
  if (!(slack_mean >= 0.0)) throw InvalidInput("GenParams: slack_mean must be non-negative");
}

void TraceIngestConfig::validate() const {
  if (!(scale_divisor > 0.0)) throw InvalidInput("trace ingest: scale_divisor must be positive");
  if (criticality_threshold < 0 || criticality_threshold > 10)
    throw InvalidInput("trace ingest: criticality_threshold must lie in 0..10");
  if (!(slack_mean >= 0.0)) throw InvalidInput("trace ingest: slack_mean must be non-negative");
}

namespace {

Tick sample_slack(Rng& rng, double mean) {
  return mean > 0.0 ? static_cast<Tick>(std::llround(rng.exponential(mean))) : 0;
}

}  // namespace

Instance generate_instance(const GenParams& params) {
  params.validate();
  Rng rng(params.seed);
  Instance inst;
  inst.seed = params.seed;
  inst.lo_fraction = params.lo_fraction;
  inst.source = InstanceSource::Synthetic;
  inst.jobs.reserve(params.n);
  for (std::size_t i = 0; i < params.n; ++i) {
    const Tick release = std::llround(rng.exponential(params.release_mean));
    const Tick processing = std::max<Tick>(1, std::llround(rng.exponential(params.processing_mean)));
    const Tick deadline = release + processing + sample_slack(rng, params.slack_mean);
    const Criticality crit = rng.bernoulli(params.lo_fraction) ? Criticality::LO : Criticality::HI;
    inst.jobs.push_back(Job::make(i, release, deadline, processing, crit));
  }
  return edf_repair(std::move(inst));
}

ScheduleTrace simulate_edf(const Instance& instance, double speed) {
  if (!(speed > 0.0 && speed <= 1.0)) throw InvalidInput("simulate_edf: speed must lie in (0, 1]");
  ScheduleTrace trace;
  std::vector<std::size_t> pending;
  for (const auto& j : instance.jobs)
    if (!j.dummy) pending.push_back(j.id);

  Tick now = 0;
  while (!pending.empty()) {
    auto best = pending.end();
    for (auto it = pending.begin(); it != pending.end(); ++it) {
      const Job& j = instance.jobs[*it];
      if (j.release > now) continue;
      if (best == pending.end() || edf_before(j, instance.jobs[*best])) best = it;
    }
    if (best == pending.end()) {
      ++now;
      trace.speeds.push_back(speed);
      continue;
    }
    const Job& j = instance.jobs[*best];
    const Tick end = now + ticks_to_finish(static_cast<double>(j.processing), speed);
    trace.events.push_back({j.id, now, end, Outcome::Completed, j.criticality, j.deadline});
    trace.speeds.insert(trace.speeds.end(), static_cast<std::size_t>(end - now), speed);
    now = end;
    pending.erase(best);
  }
  return trace;
}

std::size_t edf_misses(const Instance& instance) {
  const auto trace = simulate_edf(instance, 1.0);
  return static_cast<std::size_t>(std::count_if(
      trace.events.begin(), trace.events.end(), [](const TraceEvent& e) { return e.end > e.deadline; }));
}

Instance edf_repair(Instance instance) {
  // Work-conserving schedules share one makespan, and deadlines only grow
  // toward it, so this reaches a fixpoint.
  for (;;) {
    bool changed = false;
    for (const auto& e : simulate_edf(instance, 1.0).events) {
      Job& j = instance.jobs[e.job];
      if (e.end > j.deadline) {
        j.deadline = e.end;
        changed = true;
      }
    }
    if (!changed) return instance;
  }
}

Instance ingest_trace(const std::vector<TraceRow>& rows, const TraceIngestConfig& cfg) {
  cfg.validate();
  if (rows.empty()) throw InvalidInput("trace ingest: no rows");
  Rng rng(cfg.seed);
  Instance inst;
  inst.seed = cfg.seed;
  inst.source = InstanceSource::Trace;
  std::size_t lo_count = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TraceRow& r = rows[i];
    const std::string where = "trace row " + std::to_string(i);
    if (!std::isfinite(r.release_raw) || r.release_raw < 0.0)
      throw InvalidInput(where + ": release_time must be a non-negative number");
    if (!std::isfinite(r.processing_raw) || r.processing_raw < 0.0)
      throw InvalidInput(where + ": processing_time must be a non-negative number");
    if (r.criticality_raw < 0 || r.criticality_raw > 10)
      throw InvalidInput(where + ": criticality must lie in 0..10");
    const Tick release = std::llround(r.release_raw / cfg.scale_divisor);
    const Tick processing = std::max<Tick>(1, std::llround(r.processing_raw / cfg.scale_divisor));
    const Criticality crit =
        r.criticality_raw >= cfg.criticality_threshold ? Criticality::HI : Criticality::LO;
    if (crit == Criticality::LO) ++lo_count;
    const Tick deadline = release + processing + sample_slack(rng, cfg.slack_mean);
    inst.jobs.push_back(Job::make(i, release, deadline, processing, crit));
  }
  // Recorded for provenance only; the [0, 1) bound mirrors the file format.
  inst.lo_fraction = std::min(static_cast<double>(lo_count) / static_cast<double>(rows.size()),
                              std::nextafter(1.0, 0.0));
  return edf_repair(std::move(inst));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, std::size_t row, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == cell.size()) return v;
  } catch (const std::exception&) {
  }
  throw InvalidInput("trace row " + std::to_string(row) + ": bad " + column + " '" + cell + "'");
}

}  // namespace

std::vector<Instance> ingest_trace_csv(std::istream& csv, const TraceIngestConfig& cfg) {
  std::string line;
  if (!std::getline(csv, line)) throw InvalidInput("trace CSV is empty");
  const auto header = split_csv_line(line);
  int col_release = -1, col_processing = -1, col_crit = -1, col_instance = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto& h = header[i];
    if (h == "release_time") col_release = static_cast<int>(i);
    else if (h == "processing_time") col_processing = static_cast<int>(i);
    else if (h == "criticality") col_crit = static_cast<int>(i);
    else if (h == "instance_id") col_instance = static_cast<int>(i);
    else throw InvalidInput("trace CSV: unknown column '" + h + "'");
  }
  if (col_release < 0 || col_processing < 0 || col_crit < 0)
    throw InvalidInput("trace CSV header must contain release_time,processing_time,criticality");

  std::vector<std::string> group_order;
  std::map<std::string, std::vector<TraceRow>> groups;
  std::size_t row = 0;
  while (std::getline(csv, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw InvalidInput("trace row " + std::to_string(row) + ": expected " +
                         std::to_string(header.size()) + " columns");
    TraceRow r;
    r.release_raw = parse_number(cells[col_release], row, "release_time");
    r.processing_raw = parse_number(cells[col_processing], row, "processing_time");
    const double crit = parse_number(cells[col_crit], row, "criticality");
    if (crit != std::floor(crit) || crit < 0.0 || crit > 10.0)
      throw InvalidInput("trace row " + std::to_string(row) + ": criticality must be an integer in 0..10");
    r.criticality_raw = static_cast<int>(crit);
    const std::string key = col_instance >= 0 ? cells[col_instance] : std::string{};
    if (!groups.count(key)) group_order.push_back(key);
    groups[key].push_back(r);
    ++row;
  }
  if (group_order.empty()) throw InvalidInput("trace CSV has no rows");

  std::vector<Instance> out;
  for (std::size_t k = 0; k < group_order.size(); ++k) {
    TraceIngestConfig sub = cfg;
    sub.seed = cfg.seed + k;
    out.push_back(ingest_trace(groups[group_order[k]], sub));
  }
  return out;
}

std::vector<Instance> ingest_trace_csv(const std::filesystem::path& path, const TraceIngestConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  return ingest_trace_csv(in, cfg);
}

Instance pad_instance(Instance instance, std::size_t capacity) {
  if (instance.jobs.size() > capacity)
    throw InvalidInput("instance has " + std::to_string(instance.jobs.size()) +
                       " jobs, exceeding capacity " + std::to_string(capacity));
  while (instance.jobs.size() < capacity) {
    Job d = Job::make(instance.jobs.size(), 0, 1, 1, Criticality::LO);
    d.dummy = true;
    instance.jobs.push_back(d);
  }
  return instance;
}

}  // namespace mcsched
