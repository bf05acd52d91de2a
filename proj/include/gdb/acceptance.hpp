#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gdb::acceptance {

struct Options {
  std::uint64_t guess_trials = 100000;  ///< Monte Carlo trials for the guessing game
  unsigned workers = 0;                 ///< 0 picks hardware_concurrency
  std::uint64_t seed = 20240601;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<std::string> details;
};

/// Runs one criterion (1..9). Exceptions are caught and reported as FAIL.
CriterionResult run_criterion(int id, const Options &opt);
std::vector<CriterionResult> run_all(const Options &opt);

/// "PASS [n] name" or "FAIL [n] name", followed by indented detail lines.
std::string format(const CriterionResult &r);

} // namespace gdb::acceptance
