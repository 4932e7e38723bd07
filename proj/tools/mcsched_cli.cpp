// mcsched: generate instances, train, evaluate, sweep, and draw schedules.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcsched/checkpoint.hpp"
#include "mcsched/datagen.hpp"
#include "mcsched/eval.hpp"
#include "mcsched/gantt.hpp"
#include "mcsched/io.hpp"
#include "mcsched/ppo.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace mcsched;

namespace {

/// Resolved option values of a subcommand, for echoing into artifacts.
Json config_echo(const CLI::App& sub) {
  Json cfg;
  cfg["command"] = sub.get_name();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& key = opt->get_lnames().front();
    if (key == "help" || key == "config") continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (opt->get_type_size() == 0) {
        cfg[key] = true;
      } else {
        cfg[key] = res.size() == 1 ? Json(res.front()) : Json(res);
      }
    } else if (opt->get_type_size() == 0) {
      cfg[key] = false;
    } else {
      cfg[key] = opt->get_default_str();
    }
  }
  return cfg;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    try {
      grid.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw InvalidInput("bad grid value '" + cell + "'");
    }
  }
  if (grid.empty()) throw InvalidInput("grid is empty");
  return grid;
}

DegradationConfig make_degradation(double threshold, const std::string& floor) {
  DegradationConfig deg;
  deg.threshold = threshold;
  if (floor == "auto") {
    deg.per_instance_floor = true;
  } else {
    try {
      deg.floor = std::stod(floor);
    } catch (const std::exception&) {
      throw InvalidInput("--degradation-floor must be a number in (0, 1] or 'auto'");
    }
  }
  deg.validate();
  return deg;
}

struct GenFlags {
  std::size_t n = 50;
  std::size_t count = 100;
  std::optional<double> lo;
  std::uint64_t seed = 0;
  double release_mean = 20.0;
  double processing_mean = 5.0;
  double slack_mean = 10.0;
  std::string from_csv;
  double scale_divisor = 1000.0;
  int crit_threshold = 5;

  void add_to(CLI::App* sub, bool with_count) {
    sub->add_option("--n", n, "Jobs per instance")->capture_default_str();
    if (with_count) sub->add_option("--count", count, "Number of instances")->capture_default_str();
    sub->add_option("--lo", lo, "LO-job fraction (default: drawn per instance from U(0, 1 - 2/n))");
    sub->add_option("--seed", seed, "Base seed")->capture_default_str();
    sub->add_option("--release-mean", release_mean, "Mean release time (ticks)")->capture_default_str();
    sub->add_option("--processing-mean", processing_mean, "Mean WCET (ticks)")->capture_default_str();
    sub->add_option("--slack-mean", slack_mean, "Mean deadline slack (ticks)")->capture_default_str();
  }
  void add_trace_flags(CLI::App* sub) {
    sub->add_option("--scale-divisor", scale_divisor, "Divisor applied to raw trace times")->capture_default_str();
    sub->add_option("--crit-threshold", crit_threshold, "Raw criticality at or above this is HI")
        ->capture_default_str();
  }

  TraceIngestConfig ingest_config() const {
    TraceIngestConfig cfg;
    cfg.scale_divisor = scale_divisor;
    cfg.criticality_threshold = crit_threshold;
    cfg.slack_mean = slack_mean;
    cfg.seed = seed;
    return cfg;
  }

  /// Instance k uses seed + k; without --lo, its LO fraction comes from a generator seeded by seed.
  std::vector<Instance> generate() const {
    Rng lo_rng(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
    std::vector<Instance> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      GenParams p;
      p.n = n;
      p.release_mean = release_mean;
      p.processing_mean = processing_mean;
      p.slack_mean = slack_mean;
      p.seed = seed + k;
      p.lo_fraction = lo ? *lo : lo_rng.uniform(0.0, GenParams::max_lo_fraction(n));
      out.push_back(generate_instance(p));
    }
    return out;
  }

  std::vector<Instance> load_or_generate(const std::string& instances_path) const {
    if (!instances_path.empty()) {
      const fs::path p(instances_path);
      if (p.extension() == ".csv") return ingest_trace_csv(p, ingest_config());
      return io::load_instances(p);
    }
    if (!from_csv.empty()) return ingest_trace_csv(fs::path(from_csv), ingest_config());
    return generate();
  }
};

std::string instance_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "instance_%05zu.json", k);
  return buf;
}

std::vector<std::uint64_t> episode_seeds(std::uint64_t seed, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = (seed + i) * 0xD1B54A32D192ED03ULL + 7;
  return seeds;
}

std::vector<Instance> pad_all(std::vector<Instance> instances, std::size_t n_max) {
  if (n_max == 0) return instances;
  for (auto& inst : instances) inst = pad_instance(std::move(inst), n_max);
  return instances;
}

/// Pads to the checkpoint's slot count when the policy is a trained network.
std::size_t resolve_n_max(const Policy& policy, std::size_t requested) {
  if (const auto* net = dynamic_cast<const NetworkPolicy*>(&policy)) {
    if (requested != 0 && requested != net->n_max())
      throw CheckpointError("--n-max " + std::to_string(requested) + " does not match the checkpoint's n_max " +
                            std::to_string(net->n_max()));
    return net->n_max();
  }
  return requested;
}

void mark_incomplete(const std::string& out_dir, const std::string& message) {
  if (out_dir.empty()) return;
  std::error_code ec;
  if (!fs::exists(out_dir, ec)) return;
  std::ofstream(fs::path(out_dir) / "INCOMPLETE") << message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-criticality non-preemptive scheduling lab"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read option values from a TOML/INI file");

  std::string out_dir;

  // generate
  GenFlags gen;
  auto* cmd_generate = app.add_subcommand("generate", "Write repaired synthetic (or ingested trace) instances");
  gen.add_to(cmd_generate, true);
  gen.add_trace_flags(cmd_generate);
  cmd_generate->add_option("--from-csv", gen.from_csv, "Ingest a server trace CSV instead of generating");
  cmd_generate->add_option("--out", out_dir, "Output directory")->required();

  // train
  ppo::PpoHyper hyper;
  std::size_t train_n = 5, train_n_max = 0;
  std::uint64_t train_seed = 0;
  bool train_degrade = false;
  std::string floor_flag = "auto";
  GenFlags train_gen;
  auto* cmd_train = app.add_subcommand("train", "Train a masked PPO scheduler");
  cmd_train->add_option("--n", train_n, "Jobs per training instance")->capture_default_str();
  cmd_train->add_option("--n-max", train_n_max, "Job slots of the policy (default: --n)")->capture_default_str();
  cmd_train->add_option("--steps", hyper.total_steps, "Environment steps")->capture_default_str();
  cmd_train->add_option("--seed", train_seed, "Training seed")->capture_default_str();
  cmd_train->add_flag("--degradation", train_degrade, "Draw a degradation threshold from U(0.05, 0.95) per episode");
  cmd_train->add_option("--degradation-floor", floor_flag, "Lowest degraded speed, or 'auto'")->capture_default_str();
  cmd_train->add_option("--release-mean", train_gen.release_mean)->capture_default_str();
  cmd_train->add_option("--processing-mean", train_gen.processing_mean)->capture_default_str();
  cmd_train->add_option("--slack-mean", train_gen.slack_mean)->capture_default_str();
  cmd_train->add_option("--lr", hyper.learning_rate)->capture_default_str();
  cmd_train->add_option("--gamma", hyper.gamma)->capture_default_str();
  cmd_train->add_option("--gae-lambda", hyper.gae_lambda)->capture_default_str();
  cmd_train->add_option("--clip", hyper.clip_epsilon)->capture_default_str();
  cmd_train->add_option("--rollout", hyper.rollout_length)->capture_default_str();
  cmd_train->add_option("--minibatch", hyper.minibatch_size)->capture_default_str();
  cmd_train->add_option("--epochs", hyper.epochs)->capture_default_str();
  cmd_train->add_option("--entropy-coef", hyper.entropy_coef)->capture_default_str();
  cmd_train->add_option("--value-coef", hyper.value_coef)->capture_default_str();
  cmd_train->add_option("--max-grad-norm", hyper.max_grad_norm)->capture_default_str();
  cmd_train->add_option("--hidden", hyper.hidden)->capture_default_str();
  cmd_train->add_option("--out", out_dir, "Output directory")->required();
  bool quiet = false;
  cmd_train->add_flag("--quiet", quiet, "No progress lines on stderr");

  // evaluate
  std::string policy_spec = "edf", checkpoint_path, instances_path;
  double threshold = 0.0;
  std::size_t n_max = 0;
  bool write_traces = false;
  GenFlags eval_gen;
  auto* cmd_eval = app.add_subcommand("evaluate", "Roll out a policy and report completion metrics");
  cmd_eval->add_option("--policy", policy_spec, "edf|crit-edf|priority|random|checkpoint:<path>")
      ->capture_default_str();
  cmd_eval->add_option("--checkpoint", checkpoint_path, "Shorthand for --policy checkpoint:<path>");
  cmd_eval->add_option("--instances", instances_path, "Instance JSON file, directory, or trace CSV");
  eval_gen.add_to(cmd_eval, true);
  eval_gen.add_trace_flags(cmd_eval);
  cmd_eval->add_option("--degradation-threshold", threshold, "Per-tick degradation probability")
      ->capture_default_str();
  cmd_eval->add_option("--degradation-floor", floor_flag, "Lowest degraded speed, or 'auto'")->capture_default_str();
  cmd_eval->add_option("--n-max", n_max, "Pad instances to this many slots")->capture_default_str();
  cmd_eval->add_flag("--traces", write_traces, "Also write one schedule trace per instance");
  cmd_eval->add_option("--out", out_dir, "Output directory")->required();

  // sweep
  std::string sweep_kind = "degradation", grid_text = "0.1,0.2,0.3,0.4,0.5";
  std::size_t episodes = 1000;
  GenFlags sweep_gen;
  auto* cmd_sweep = app.add_subcommand("sweep", "Sensitivity sweep over LO fraction or degradation threshold");
  cmd_sweep->add_option("--kind", sweep_kind, "lo|degradation")
      ->check(CLI::IsMember({"lo", "degradation"}))
      ->capture_default_str();
  cmd_sweep->add_option("--grid", grid_text, "Comma-separated grid values")->capture_default_str();
  cmd_sweep->add_option("--episodes", episodes, "Episodes per grid point")->capture_default_str();
  cmd_sweep->add_option("--policy", policy_spec)->capture_default_str();
  cmd_sweep->add_option("--checkpoint", checkpoint_path);
  sweep_gen.add_to(cmd_sweep, false);
  cmd_sweep->add_option("--degradation-threshold", threshold, "Threshold held fixed during an LO sweep")
      ->capture_default_str();
  cmd_sweep->add_option("--degradation-floor", floor_flag, "Lowest degraded speed, or 'auto'")->capture_default_str();
  cmd_sweep->add_option("--n-max", n_max)->capture_default_str();
  cmd_sweep->add_option("--out", out_dir, "Output directory")->required();

  // gantt
  std::string trace_path, svg_path;
  auto* cmd_gantt = app.add_subcommand("gantt", "Render a schedule trace as SVG");
  cmd_gantt->add_option("--trace", trace_path, "Trace JSON")->required();
  cmd_gantt->add_option("--out", svg_path, "Output SVG file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_generate) {
      const Json cfg = config_echo(*cmd_generate);
      const auto instances = gen.load_or_generate("");
      fs::create_directories(out_dir);
      Json manifest;
      manifest["config"] = cfg;
      Json files = Json::array();
      for (std::size_t k = 0; k < instances.size(); ++k) {
        const auto name = instance_name(k);
        io::save_instance(instances[k], fs::path(out_dir) / name);
        files.push_back({{"file", name},
                         {"seed", instances[k].seed},
                         {"lo_fraction", instances[k].lo_fraction},
                         {"jobs", instances[k].size()}});
      }
      manifest["instances"] = std::move(files);
      io::write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
      std::cout << "wrote " << instances.size() << " instances to " << out_dir << "\n";
    } else if (*cmd_train) {
      const Json cfg = config_echo(*cmd_train);
      const std::size_t slots = train_n_max == 0 ? train_n : train_n_max;
      GenParams base;
      base.n = train_n;
      base.lo_fraction = 0.0;
      base.release_mean = train_gen.release_mean;
      base.processing_mean = train_gen.processing_mean;
      base.slack_mean = train_gen.slack_mean;
      const auto deg = make_degradation(0.0, floor_flag);
      auto source = ppo::synthetic_episodes(base, slots, train_degrade, deg.per_instance_floor, deg.floor);
      fs::create_directories(out_dir);
      auto result = ppo::train(source, slots, hyper, train_seed, [&](const ppo::TrainProgress& p) {
        if (!quiet)
          std::cerr << "step " << p.step << " episodes " << p.episodes << " mean_reward " << p.mean_reward
                    << " value_loss " << p.loss.value << " entropy " << p.loss.entropy << "\n";
      });
      PolicyCheckpoint ckpt;
      ckpt.network = std::move(result.network);
      ckpt.hyper = hyper;
      ckpt.n_max = slots;
      ckpt.observation_layout = observation_layout(slots);
      ckpt.training_seed = train_seed;
      ckpt.episode_rewards = std::move(result.episode_rewards);
      ckpt.update_curve = std::move(result.update_curve);
      ckpt.config_echo = cfg.dump();
      save_checkpoint(ckpt, fs::path(out_dir) / "checkpoint.bin");
      std::string curve = "step,episode_reward_mean\n";
      for (const auto& p : ckpt.update_curve) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", p.value);
        curve += std::to_string(p.step) + "," + buf + "\n";
      }
      io::write_file(fs::path(out_dir) / "curve.csv", curve);
      std::string episodes_csv = "episode,step,reward\n";
      for (std::size_t i = 0; i < ckpt.episode_rewards.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", ckpt.episode_rewards[i].value);
        episodes_csv += std::to_string(i) + "," + std::to_string(ckpt.episode_rewards[i].step) + "," + buf + "\n";
      }
      io::write_file(fs::path(out_dir) / "episodes.csv", episodes_csv);
      io::write_file(fs::path(out_dir) / "train_config.json", cfg.dump(2) + "\n");
      std::cout << "trained " << ckpt.episode_rewards.size() << " episodes; checkpoint at "
                << (fs::path(out_dir) / "checkpoint.bin").string() << "\n";
    } else if (*cmd_eval) {
      const Json cfg = config_echo(*cmd_eval);
      if (!checkpoint_path.empty()) policy_spec = "checkpoint:" + checkpoint_path;
      auto policy = make_policy(policy_spec);
      const std::size_t slots = resolve_n_max(*policy, n_max);
      const auto instances = pad_all(eval_gen.load_or_generate(instances_path), slots);
      const auto deg = make_degradation(threshold, floor_flag);
      std::vector<ScheduleTrace> traces;
      const auto seeds = episode_seeds(eval_gen.seed, instances.size());
      auto report = evaluate(*policy, instances, deg, seeds, write_traces ? &traces : nullptr);
      fs::create_directories(out_dir);
      io::write_file(fs::path(out_dir) / "report.json", report_to_json(report, cfg.dump()));
      io::write_file(fs::path(out_dir) / "report.csv", report_to_csv(report));
      for (std::size_t k = 0; k < traces.size(); ++k) {
        traces[k].instance_ref = instances_path.empty() ? "instance " + std::to_string(k)
                                                        : instances_path + "#" + std::to_string(k);
        char name[40];
        std::snprintf(name, sizeof name, "trace_%05zu.json", k);
        io::save_trace(traces[k], fs::path(out_dir) / "traces" / name);
      }
      std::printf("policy %s: HI completion %.4f, overall %.4f, missed HI %.3f, missed %.3f, min speed (HI) %.4f\n",
                  report.policy.c_str(), report.hi_completion_rate, report.overall_completion_rate,
                  report.avg_missed_hi, report.avg_missed_overall, report.mean_min_speed_hi);
    } else if (*cmd_sweep) {
      const Json cfg = config_echo(*cmd_sweep);
      if (!checkpoint_path.empty()) policy_spec = "checkpoint:" + checkpoint_path;
      auto policy = make_policy(policy_spec);
      SweepOptions opts;
      opts.gen.n = sweep_gen.n;
      opts.gen.release_mean = sweep_gen.release_mean;
      opts.gen.processing_mean = sweep_gen.processing_mean;
      opts.gen.slack_mean = sweep_gen.slack_mean;
      opts.gen.lo_fraction = sweep_gen.lo.value_or(0.3);
      opts.episodes_per_point = episodes;
      opts.seed = sweep_gen.seed;
      opts.degradation = make_degradation(threshold, floor_flag);
      opts.n_max = resolve_n_max(*policy, n_max);
      const auto grid = parse_grid(grid_text);
      const auto table = sweep_kind == "lo" ? sweep_lo(*policy, grid, opts) : sweep_degradation(*policy, grid, opts);
      fs::create_directories(out_dir);
      io::write_file(fs::path(out_dir) / ("sweep_" + sweep_kind + ".csv"), sweep_to_csv(table));
      Json doc;
      doc["config"] = cfg;
      doc["parameter"] = table.parameter;
      doc["trend_violation"] = trend_violation(table);
      Json rows = Json::array();
      for (const auto& r : table.rows)
        rows.push_back({{"value", r.grid_value},
                        {"hi_rate", r.report.hi_completion_rate},
                        {"overall_rate", r.report.overall_completion_rate},
                        {"missed_hi", r.report.avg_missed_hi},
                        {"missed_overall", r.report.avg_missed_overall}});
      doc["rows"] = std::move(rows);
      io::write_file(fs::path(out_dir) / ("sweep_" + sweep_kind + ".json"), doc.dump(2) + "\n");
      std::cout << sweep_to_csv(table);
      if (sweep_kind == "degradation" && trend_violation(table))
        std::cerr << "warning: overall completion rose by more than 2 points between adjacent thresholds\n";
    } else if (*cmd_gantt) {
      const auto trace = io::load_trace(trace_path);
      io::write_file(svg_path, render_gantt_svg(trace));
      std::cout << "wrote " << svg_path << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    mark_incomplete(out_dir, e.what());
    return 1;
  }
  return 0;
}
