#include "gdb/artifacts.hpp"

#include <sstream>

#include "gdb/crypto.hpp"
#include "gdb/io.hpp"
#include "json.hpp"

namespace gdb::artifacts {

namespace {

std::string sha256_hex(const std::string &content) { return crypto::to_hex(crypto::hash(std::string_view(content))); }

} // namespace

RunOutputs run_to_dir(Scenario s, const std::string &scenario_path, std::optional<std::uint64_t> seed,
                      const std::filesystem::path &out_dir) {
  if (seed) s.rng_seed = *seed;
  RunOutputs out;
  out.result = proto::run_scenario(s);

  std::ostringstream trace, bounds, detection;
  simkit::write_trace_jsonl(out.result.trace, trace);
  proto::write_bounds_csv(out.result.estimates, bounds);
  threat::write_detection_json(out.result.detection.value_or(threat::DetectionReport{}), detection);

  std::filesystem::create_directories(out_dir);
  auto &m = out.manifest;
  m.scenario_path = scenario_path;
  m.seed = s.rng_seed;
  m.out_dir = out_dir.string();
  for (const auto &[name, text] : {std::pair{"trace.jsonl", trace.str()}, std::pair{"bounds.csv", bounds.str()},
                                   std::pair{"detection.json", detection.str()}}) {
    io::write_file(out_dir / name, text);
    m.artifacts.push_back({name, sha256_hex(text), text.size()});
  }
  io::write_file(out_dir / "manifest.json", manifest_json(m));
  return out;
}

std::string manifest_json(const RunManifest &m) {
  nlohmann::json arts = nlohmann::json::array();
  for (const auto &a : m.artifacts) arts.push_back({{"name", a.name}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  nlohmann::json j = {{"scenario", m.scenario_path}, {"seed", m.seed}, {"out", m.out_dir}, {"artifacts", arts}};
  return j.dump(2) + "\n";
}

std::vector<std::string> check_manifest(const RunManifest &m, const std::filesystem::path &dir) {
  std::vector<std::string> bad;
  for (const auto &a : m.artifacts) {
    const auto p = dir / a.name;
    if (!std::filesystem::exists(p) || sha256_hex(io::read_file(p)) != a.sha256) bad.push_back(a.name);
  }
  return bad;
}

} // namespace gdb::artifacts
