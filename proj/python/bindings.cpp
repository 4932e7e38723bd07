#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mcsched/checkpoint.hpp"
#include "mcsched/datagen.hpp"
#include "mcsched/eval.hpp"
#include "mcsched/gantt.hpp"
#include "mcsched/io.hpp"
#include "mcsched/speed.hpp"

namespace py = pybind11;
using namespace mcsched;

namespace {

DegradationConfig degradation(double threshold, std::optional<double> floor) {
  DegradationConfig d;
  d.threshold = threshold;
  // No floor given means the per-instance HI-preserving floor, as in the CLI.
  if (floor) {
    d.floor = *floor;
  } else {
    d.per_instance_floor = true;
  }
  d.validate();
  return d;
}

py::object json_loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

py::tuple wrap_step(const StepResult& r) {
  py::array_t<double> obs(static_cast<py::ssize_t>(r.observation.values.size()), r.observation.values.data());
  py::array_t<bool> mask(static_cast<py::ssize_t>(r.mask.size()));
  auto m = mask.mutable_unchecked<1>();
  for (std::size_t i = 0; i < r.mask.size(); ++i) m(static_cast<py::ssize_t>(i)) = r.mask.bits[i] != 0;
  return py::make_tuple(obs, mask, r.reward, r.done);
}

}  // namespace

PYBIND11_MODULE(_mcsched, m) {
  m.doc() = "Dual-criticality job scheduling: instances, environment, baselines and PPO.";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<MaskedActionError>(m, "MaskedActionError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_RuntimeError);

  py::class_<Job>(m, "Job")
      .def_readonly("id", &Job::id)
      .def_readonly("release", &Job::release)
      .def_readonly("deadline", &Job::deadline)
      .def_readonly("processing", &Job::processing)
      .def_readonly("dummy", &Job::dummy)
      .def_property_readonly("criticality", [](const Job& j) { return j.is_hi() ? "HI" : "LO"; })
      .def("__repr__", [](const Job& j) {
        return "Job(id=" + std::to_string(j.id) + ", release=" + std::to_string(j.release) +
               ", deadline=" + std::to_string(j.deadline) + ", processing=" + std::to_string(j.processing) +
               ", " + (j.is_hi() ? "HI" : "LO") + ")";
      });

  py::class_<Instance>(m, "Instance")
      .def_readonly("jobs", &Instance::jobs)
      .def_readonly("seed", &Instance::seed)
      .def_readonly("lo_fraction", &Instance::lo_fraction)
      .def_property_readonly("horizon", &Instance::horizon)
      .def("__len__", &Instance::size)
      .def("to_json", [](const Instance& i) { return io::instance_to_json(i); })
      .def_static("from_json", &io::instance_from_json)
      .def_static("load", &io::load_instance)
      .def("save", [](const Instance& i, const std::filesystem::path& p) { io::save_instance(i, p); })
      .def("padded", &pad_instance, py::arg("n_max"));

  py::class_<ScheduleTrace>(m, "Trace")
      .def_readonly("speeds", &ScheduleTrace::speeds)
      .def("start_order", &ScheduleTrace::start_order)
      .def("to_json", [](const ScheduleTrace& t) { return io::trace_to_json(t); })
      .def_static("from_json", &io::trace_from_json)
      .def_static("load", &io::load_trace)
      .def("__len__", [](const ScheduleTrace& t) { return t.events.size(); });

  m.def(
      "generate_instance",
      [](std::size_t n, double lo_fraction, std::uint64_t seed, double release_mean, double processing_mean,
         double slack_mean) {
        GenParams p;
        p.n = n;
        p.lo_fraction = lo_fraction;
        p.seed = seed;
        p.release_mean = release_mean;
        p.processing_mean = processing_mean;
        p.slack_mean = slack_mean;
        return generate_instance(p);
      },
      py::arg("n") = 50, py::arg("lo_fraction") = 0.3, py::arg("seed") = 0, py::arg("release_mean") = 20.0,
      py::arg("processing_mean") = 5.0, py::arg("slack_mean") = 10.0);
  m.def("max_lo_fraction", &GenParams::max_lo_fraction, py::arg("n"));
  m.def("simulate_edf", &simulate_edf, py::arg("instance"), py::arg("speed") = 1.0);
  m.def("edf_misses", &edf_misses, py::arg("instance"));

  py::class_<SchedulingEnv>(m, "Env")
      .def(py::init<>())
      .def(
          "reset",
          [](SchedulingEnv& env, const Instance& inst, double threshold, std::optional<double> floor,
             std::uint64_t seed) { return wrap_step(env.reset(inst, degradation(threshold, floor), seed)); },
          py::arg("instance"), py::arg("degradation_threshold") = 0.0, py::arg("floor") = py::none(),
          py::arg("seed") = 0, "Returns (observation, mask, reward, done).")
      .def(
          "step", [](SchedulingEnv& env, std::size_t a) { return wrap_step(env.step(a)); }, py::arg("action"))
      .def_property_readonly("now", &SchedulingEnv::now)
      .def_property_readonly("done", &SchedulingEnv::done)
      .def_property_readonly("speed", [](const SchedulingEnv& e) { return e.state().speed; })
      .def_property_readonly("trace", &SchedulingEnv::trace);

  m.def(
      "evaluate",
      [](const std::string& policy, const std::vector<Instance>& instances, double threshold,
         std::optional<double> floor, std::optional<std::vector<std::uint64_t>> seeds, bool keep_traces) {
        auto p = make_policy(policy);
        std::vector<std::uint64_t> s;
        if (seeds) {
          s = *seeds;
        } else {
          for (const auto& inst : instances) s.push_back(inst.seed);
        }
        std::vector<ScheduleTrace> traces;
        const auto report = evaluate(*p, instances, degradation(threshold, floor), s, keep_traces ? &traces : nullptr);
        py::dict out = json_loads(report_to_json(report, "{}"));
        if (keep_traces) out["traces"] = traces;
        return out;
      },
      py::arg("policy"), py::arg("instances"), py::arg("degradation_threshold") = 0.0, py::arg("floor") = py::none(),
      py::arg("seeds") = py::none(), py::arg("traces") = false,
      "Policy is edf, crit-edf, priority, random or checkpoint:<path>. Seeds default to the instance seeds.");

  m.def(
      "min_tolerable_speed",
      [](const Instance& inst, const ScheduleTrace& trace, const std::string& keep) {
        if (keep != "hi" && keep != "all") throw InvalidInput("keep must be 'hi' or 'all'");
        return min_tolerable_speed(inst, trace, keep == "hi" ? KeepSet::HiOnly : KeepSet::All);
      },
      py::arg("instance"), py::arg("trace"), py::arg("keep") = "hi");
  m.def("degradation_floor", &degradation_floor, py::arg("instance"));

  m.def(
      "brute_force_best_schedule",
      [](const Instance& inst) {
        const auto r = brute_force_best_schedule(inst);
        py::dict d;
        d["order"] = r.order;
        d["completed"] = r.completed;
        d["completed_hi"] = r.completed_hi;
        return d;
      },
      py::arg("instance"));

  m.def(
      "train",
      [](std::size_t n, std::uint64_t steps, std::uint64_t seed, double release_mean, bool degrade,
         std::size_t hidden, std::size_t rollout, std::optional<std::filesystem::path> checkpoint) {
        ppo::PpoHyper hyper;
        hyper.total_steps = steps;
        hyper.hidden = hidden;
        hyper.rollout_length = rollout;
        hyper.validate();
        GenParams base;
        base.n = n;
        base.release_mean = release_mean;
        auto result = [&] {
          py::gil_scoped_release release;
          return ppo::train(ppo::synthetic_episodes(base, n, degrade, true), n, hyper, seed);
        }();
        std::vector<double> rewards;
        for (const auto& p : result.episode_rewards) rewards.push_back(p.value);
        if (checkpoint) {
          PolicyCheckpoint ckpt;
          ckpt.network = std::move(result.network);
          ckpt.hyper = hyper;
          ckpt.n_max = n;
          ckpt.observation_layout = observation_layout(n);
          ckpt.training_seed = seed;
          ckpt.episode_rewards = std::move(result.episode_rewards);
          ckpt.update_curve = std::move(result.update_curve);
          ckpt.config_echo = "{}";
          save_checkpoint(ckpt, *checkpoint);
        }
        return rewards;
      },
      py::arg("n") = 5, py::arg("steps") = 20000, py::arg("seed") = 0, py::arg("release_mean") = 2.0,
      py::arg("degradation") = false, py::arg("hidden") = 128, py::arg("rollout") = 2048,
      py::arg("checkpoint") = py::none(), "Trains a masked PPO agent and returns per-episode rewards.");

  m.def(
      "checkpoint_info",
      [](const std::filesystem::path& path) {
        const auto c = load_checkpoint(path);
        py::dict d;
        d["version"] = c.version;
        d["n_max"] = c.n_max;
        d["hidden"] = c.network.shape().hidden;
        d["parameters"] = c.network.params().size();
        d["training_seed"] = c.training_seed;
        d["episodes"] = c.episode_rewards.size();
        return d;
      },
      py::arg("path"));

  m.def("render_gantt_svg", &render_gantt_svg, py::arg("trace"));
}
