#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "gdb/acceptance.hpp"
#include "gdb/analysis.hpp"
#include "gdb/artifacts.hpp"
#include "gdb/errors.hpp"
#include "gdb/io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kRuntimeError = 3;

int exit_code_for(const gdb::Error &e) { return gdb::is_input_error(e.code()) ? kInputError : kRuntimeError; }

unsigned worker_count(unsigned requested) {
  if (requested) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_run(const std::string &scenario, std::optional<std::uint64_t> seed, const fs::path &out) {
  try {
    const auto outputs = gdb::artifacts::run_to_dir(gdb::io::load_scenario(scenario), scenario, seed, out);
    std::cout << outputs.result.estimates.size() << " bounds, " << outputs.result.trace.count_all()
              << " emissions -> " << out.string() << "\n";
    if (outputs.result.detection && !outputs.result.detection->empty()) std::cout << "detection raised, see detection.json\n";
    return kOk;
  } catch (const gdb::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

// --param config.n=1,2,3 sets /config/n in the scenario document.
struct SweepAxis {
  std::string key;
  json::json_pointer ptr;
  std::vector<json> values;
};

SweepAxis parse_axis(const std::string &spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw gdb::Error(gdb::ErrorCode::ParseError, "--param '" + spec + "': expected key=v1,v2,...");
  }
  SweepAxis axis;
  axis.key = spec.substr(0, eq);
  std::string ptr = "/" + axis.key;
  std::replace(ptr.begin(), ptr.end(), '.', '/');
  axis.ptr = json::json_pointer(ptr);
  std::istringstream in(spec.substr(eq + 1));
  std::string item;
  while (std::getline(in, item, ',')) {
    auto v = json::parse(item, nullptr, false);
    axis.values.push_back(v.is_discarded() ? json(item) : v);
  }
  return axis;
}

struct SweepRun {
  std::vector<json> point;
  std::string status = "ok";
  int code = kOk;
};

std::string csv_cell(const json &v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

int cmd_sweep(const std::string &scenario, const std::vector<std::string> &params, std::optional<std::uint64_t> seed,
              const fs::path &out, unsigned workers) {
  json base;
  std::vector<SweepAxis> axes;
  try {
    base = json::parse(gdb::io::read_file(scenario), nullptr, false);
    if (base.is_discarded()) throw gdb::Error(gdb::ErrorCode::ParseError, scenario + ": malformed JSON");
    for (const auto &p : params) axes.push_back(parse_axis(p));
  } catch (const gdb::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception &e) {
    std::cerr << "error: ParseError: --param: " << e.what() << "\n";
    return kInputError;
  }

  std::vector<SweepRun> runs(1);
  for (const auto &axis : axes) {
    std::vector<SweepRun> next;
    for (const auto &r : runs) {
      for (const auto &v : axis.values) {
        next.push_back(r);
        next.back().point.push_back(v);
      }
    }
    runs = std::move(next);
  }

  auto run_dir = [&](std::size_t i) {
    std::ostringstream name;
    name << "run_" << std::setw(4) << std::setfill('0') << i;
    return out / name.str();
  };

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      auto &r = runs[i];
      try {
        json doc = base;
        for (std::size_t k = 0; k < axes.size(); ++k) doc[axes[k].ptr] = r.point[k];
        gdb::artifacts::run_to_dir(gdb::io::parse_scenario(doc.dump()), scenario, seed, run_dir(i));
      } catch (const gdb::Error &e) {
        r.status = e.what();
        r.code = exit_code_for(e);
      } catch (const json::exception &e) {
        r.status = std::string("ParseError: ") + e.what();
        r.code = kInputError;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::min<std::size_t>(worker_count(workers), runs.size()); ++w) pool.emplace_back(work);
  for (auto &t : pool) t.join();

  fs::create_directories(out);
  std::ofstream merged(out / "sweep.csv");
  merged << "run";
  for (const auto &a : axes) merged << "," << a.key;
  merged << ",status,measurer,target,bound_m,method,auth_ok,surplus\n";
  int code = kOk;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto &r = runs[i];
    std::ostringstream prefix;
    prefix << i;
    for (const auto &v : r.point) prefix << "," << csv_cell(v);
    if (r.code != kOk) {
      std::string status = r.status;
      std::replace(status.begin(), status.end(), ',', ';');
      merged << prefix.str() << "," << status << ",,,,,,\n";
      std::cerr << "run " << i << ": " << r.status << "\n";
      if (code == kOk) code = r.code;
      continue;
    }
    std::ifstream bounds(run_dir(i) / "bounds.csv");
    std::string line;
    std::getline(bounds, line);  // header
    while (std::getline(bounds, line)) merged << prefix.str() << ",ok," << line << "\n";
  }
  std::cout << runs.size() << " runs -> " << (out / "sweep.csv").string() << "\n";
  return code;
}

int cmd_figures(std::vector<std::string> which, const fs::path &out) {
  if (which.empty()) which = {"6a", "6b", "6c", "6d"};
  try {
    std::vector<std::string> csvs;
    for (const auto &w : which) csvs.push_back(gdb::analysis::figure_csv(w));
    fs::create_directories(out);
    for (std::size_t i = 0; i < which.size(); ++i) {
      gdb::io::write_file(out / ("fig" + which[i] + ".csv"), csvs[i]);
      std::cout << (out / ("fig" + which[i] + ".csv")).string() << "\n";
    }
    return kOk;
  } catch (const gdb::Error &e) {
    std::cerr << "error: --which: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_verify(bool quick, unsigned workers, std::uint64_t seed) {
  gdb::acceptance::Options opt;
  if (quick) opt.guess_trials = 10000;
  opt.workers = workers;
  opt.seed = seed;
  int failed = 0;
  for (int id = 1; id <= 9; ++id) {
    const auto r = gdb::acceptance::run_criterion(id, opt);
    std::cout << gdb::acceptance::format(r) << std::flush;
    failed += !r.pass;
  }
  std::cout << failed << " of 9 criteria failed\n";
  return failed ? 1 : kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Group distance bounding simulator"};
  app.require_subcommand(1);
  unsigned workers = 0;
  app.add_option("--workers", workers, "Worker threads for sweep and verify (0 = all cores)");

  std::string scenario;
  std::optional<std::uint64_t> seed;
  fs::path out = "out";

  auto *run = app.add_subcommand("run", "Run one scenario and write its artifacts");
  run->fallthrough();
  run->add_option("scenario", scenario, "Scenario JSON")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out, "Output directory");

  std::vector<std::string> params;
  auto *sweep = app.add_subcommand("sweep", "Run the scenario over a parameter grid");
  sweep->fallthrough();
  sweep->add_option("scenario", scenario, "Scenario JSON")->required();
  sweep->add_option("--param", params, "key=v1,v2,... with dotted keys, e.g. config.n=1,2,4");
  sweep->add_option("--seed", seed, "Override the scenario seed");
  sweep->add_option("--out", out, "Output directory");

  std::vector<std::string> which;
  auto *figures = app.add_subcommand("figures", "Write figure grid CSVs");
  figures->add_option("--which", which, "Panels: 6a 6b 6c 6d (default all)");
  figures->add_option("--out", out, "Output directory");

  bool quick = false, full = false;
  std::uint64_t verify_seed = gdb::acceptance::Options{}.seed;
  auto *verify = app.add_subcommand("verify", "Run the acceptance suite");
  verify->fallthrough();
  verify->add_flag("--quick", quick, "Cap the guessing experiment at 10^4 trials");
  verify->add_flag("--full", full, "Use 10^5 guessing trials (default)");
  verify->add_option("--seed", verify_seed, "Master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }
  if (quick && full) {
    std::cerr << "error: --quick and --full are exclusive\n";
    return kInputError;
  }

  try {
    if (*run) return cmd_run(scenario, seed, out);
    if (*sweep) return cmd_sweep(scenario, params, seed, out, workers);
    if (*figures) return cmd_figures(which, out);
    if (*verify) return cmd_verify(quick, workers, verify_seed);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kOk;
}
