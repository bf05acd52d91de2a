#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gdb/core.hpp"
#include "gdb/proto.hpp"

namespace gdb::artifacts {

struct Artifact {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string scenario_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::vector<Artifact> artifacts;
};

struct RunOutputs {
  proto::RunResult result;
  RunManifest manifest;
};

/// Runs `s` (seed overridden when given) and writes trace.jsonl, bounds.csv,
/// detection.json and manifest.json into `out_dir`, creating it.
RunOutputs run_to_dir(Scenario s, const std::string &scenario_path, std::optional<std::uint64_t> seed,
                      const std::filesystem::path &out_dir);

std::string manifest_json(const RunManifest &m);

/// Recomputes every listed digest; returns the names that are missing or differ.
std::vector<std::string> check_manifest(const RunManifest &m, const std::filesystem::path &dir);

} // namespace gdb::artifacts
