#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mcsched/core.hpp"

namespace mcsched::io {

inline constexpr int kInstanceFormatVersion = 1;

// Instance documents: {version, seed, lo_fraction, jobs: [{id, release,
// deadline, processing, criticality}]}. Optional "source" at top level and
// "dummy" per job. Unknown fields are rejected.
std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& text);

Instance load_instance(const std::filesystem::path& path);
void save_instance(const Instance& instance, const std::filesystem::path& path);

/// Loads one JSON file, or every *.json in a directory (sorted by name).
std::vector<Instance> load_instances(const std::filesystem::path& path);

std::string trace_to_json(const ScheduleTrace& trace);
ScheduleTrace trace_from_json(const std::string& text);

ScheduleTrace load_trace(const std::filesystem::path& path);
void save_trace(const ScheduleTrace& trace, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames, so readers never see a partial file.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mcsched::io
