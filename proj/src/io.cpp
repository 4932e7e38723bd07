#include "mcsched/io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mcsched::io {

using Json = nlohmann::ordered_json;

namespace {

void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw InvalidInput(where + ": unknown field '" + it.key() + "'");
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InvalidInput(where + ": missing field '" + key + "'");
  return *it;
}

Tick require_tick(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_number_integer())
    throw InvalidInput(where + ": field '" + key + "' must be an integer");
  return v.get<Tick>();
}

Json parse(const std::string& text, const char* what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(std::string("malformed ") + what + " JSON: " + e.what());
  }
}

std::string mask_string(const std::vector<bool>& mask) {
  std::string s(mask.size(), '0');
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) s[i] = '1';
  return s;
}

}  // namespace

std::string instance_to_json(const Instance& instance) {
  Json doc;
  doc["version"] = kInstanceFormatVersion;
  doc["seed"] = instance.seed;
  doc["lo_fraction"] = instance.lo_fraction;
  doc["source"] = instance.source == InstanceSource::Trace ? "trace" : "synthetic";
  Json jobs = Json::array();
  for (const auto& j : instance.jobs) {
    Json row;
    row["id"] = j.id;
    row["release"] = j.release;
    row["deadline"] = j.deadline;
    row["processing"] = j.processing;
    row["criticality"] = std::string(to_string(j.criticality));
    if (j.dummy) row["dummy"] = true;
    jobs.push_back(std::move(row));
  }
  doc["jobs"] = std::move(jobs);
  return doc.dump(2) + "\n";
}

Instance instance_from_json(const std::string& text) {
  const Json doc = parse(text, "instance");
  if (!doc.is_object()) throw InvalidInput("instance document must be a JSON object");
  reject_unknown(doc, {"version", "seed", "lo_fraction", "source", "jobs"}, "instance");
  const Json& version = require(doc, "version", "instance");
  if (!version.is_number_integer() || version.get<int>() != kInstanceFormatVersion)
    throw InvalidInput("unsupported instance version (expected " +
                       std::to_string(kInstanceFormatVersion) + ")");

  Instance inst;
  const Json& seed = require(doc, "seed", "instance");
  if (!seed.is_number_unsigned()) throw InvalidInput("instance: seed must be a non-negative integer");
  inst.seed = seed.get<std::uint64_t>();
  const Json& lo = require(doc, "lo_fraction", "instance");
  if (!lo.is_number()) throw InvalidInput("instance: lo_fraction must be a number");
  inst.lo_fraction = lo.get<double>();
  if (auto it = doc.find("source"); it != doc.end()) {
    if (*it == "trace") {
      inst.source = InstanceSource::Trace;
    } else if (*it == "synthetic") {
      inst.source = InstanceSource::Synthetic;
    } else {
      throw InvalidInput("instance: source must be 'synthetic' or 'trace'");
    }
  }

  const Json& jobs = require(doc, "jobs", "instance");
  if (!jobs.is_array()) throw InvalidInput("instance: jobs must be an array");
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Json& row = jobs[i];
    const std::string where = "instance job " + std::to_string(i);
    if (!row.is_object()) throw InvalidInput(where + ": must be an object");
    reject_unknown(row, {"id", "release", "deadline", "processing", "criticality", "dummy"}, where);
    const Json& crit = require(row, "criticality", where);
    if (!crit.is_string()) throw InvalidInput(where + ": criticality must be \"LO\" or \"HI\"");
    Job j = Job::make(static_cast<std::size_t>(require_tick(row, "id", where)),
                      require_tick(row, "release", where), require_tick(row, "deadline", where),
                      require_tick(row, "processing", where),
                      criticality_from_string(crit.get<std::string>()));
    if (auto it = row.find("dummy"); it != row.end()) {
      if (!it->is_boolean()) throw InvalidInput(where + ": dummy must be a boolean");
      j.dummy = it->get<bool>();
    }
    inst.jobs.push_back(j);
  }
  inst.validate();
  return inst;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    out << content;
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw InvalidInput("write failed for '" + path.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

Instance load_instance(const std::filesystem::path& path) {
  try {
    return instance_from_json(read_file(path));
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  write_file(path, instance_to_json(instance));
}

std::vector<Instance> load_instances(const std::filesystem::path& path) {
  if (!std::filesystem::is_directory(path)) return {load_instance(path)};
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(path)) {
    const auto& p = entry.path();
    if (entry.is_regular_file() && p.extension() == ".json" && p.filename() != "manifest.json")
      files.push_back(p);
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidInput("no instance files in '" + path.string() + "'");
  std::vector<Instance> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_instance(f));
  return out;
}

std::string trace_to_json(const ScheduleTrace& trace) {
  Json doc;
  doc["instance_ref"] = trace.instance_ref;
  Json events = Json::array();
  for (const auto& e : trace.events) {
    Json ev;
    ev["job"] = e.job;
    ev["start"] = e.start;
    ev["end"] = e.end;
    ev["outcome"] = std::string(to_string(e.outcome));
    ev["criticality"] = std::string(to_string(e.criticality));
    ev["deadline"] = e.deadline;
    events.push_back(std::move(ev));
  }
  doc["events"] = std::move(events);
  doc["speeds"] = trace.speeds;
  Json decisions = Json::array();
  for (const auto& d : trace.decisions) {
    Json row;
    row["time"] = d.time;
    row["action"] = d.action;
    row["mask"] = mask_string(d.mask);
    decisions.push_back(std::move(row));
  }
  doc["decisions"] = std::move(decisions);
  return doc.dump(1) + "\n";
}

ScheduleTrace trace_from_json(const std::string& text) {
  const Json doc = parse(text, "trace");
  if (!doc.is_object()) throw InvalidInput("trace document must be a JSON object");
  reject_unknown(doc, {"instance_ref", "events", "speeds", "decisions"}, "trace");
  ScheduleTrace trace;
  try {
    trace.instance_ref = doc.value("instance_ref", std::string{});
    for (const auto& ev : require(doc, "events", "trace")) {
      TraceEvent e;
      e.job = ev.at("job").get<std::size_t>();
      e.start = ev.at("start").get<Tick>();
      e.end = ev.at("end").get<Tick>();
      const auto outcome = ev.at("outcome").get<std::string>();
      if (outcome == "completed") {
        e.outcome = Outcome::Completed;
      } else if (outcome == "aborted") {
        e.outcome = Outcome::Aborted;
      } else {
        throw InvalidInput("trace: unknown outcome '" + outcome + "'");
      }
      e.criticality = criticality_from_string(ev.at("criticality").get<std::string>());
      e.deadline = ev.at("deadline").get<Tick>();
      trace.events.push_back(e);
    }
    if (auto it = doc.find("speeds"); it != doc.end()) trace.speeds = it->get<std::vector<double>>();
    if (auto it = doc.find("decisions"); it != doc.end()) {
      for (const auto& row : *it) {
        Decision d;
        d.time = row.at("time").get<Tick>();
        d.action = row.at("action").get<std::size_t>();
        for (char c : row.at("mask").get<std::string>()) {
          if (c != '0' && c != '1') throw InvalidInput("trace: mask must be a 0/1 string");
          d.mask.push_back(c == '1');
        }
        trace.decisions.push_back(std::move(d));
      }
    }
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed trace: ") + e.what());
  }
  trace.validate();
  return trace;
}

ScheduleTrace load_trace(const std::filesystem::path& path) {
  try {
    return trace_from_json(read_file(path));
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

void save_trace(const ScheduleTrace& trace, const std::filesystem::path& path) {
  write_file(path, trace_to_json(trace));
}

}  // namespace mcsched::io
