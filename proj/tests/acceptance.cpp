// Runs every acceptance criterion and prints one PASS/FAIL line each.
#include <cstdio>
#include <cstring>
#include <string>

#include "gdb/acceptance.hpp"

int main(int argc, char **argv) {
  gdb::acceptance::Options opt;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--quick")) opt.guess_trials = 10000;
    else if (!std::strcmp(argv[i], "--workers") && i + 1 < argc) opt.workers = static_cast<unsigned>(std::stoul(argv[++i]));
    else {
      std::fprintf(stderr, "usage: %s [--quick] [--workers N]\n", argv[0]);
      return 2;
    }
  }
  int failed = 0;
  for (const auto &r : gdb::acceptance::run_all(opt)) {
    std::fputs(gdb::acceptance::format(r).c_str(), stdout);
    std::fflush(stdout);
    failed += !r.pass;
  }
  std::printf("%d of 9 criteria failed\n", failed);
  return failed ? 1 : 0;
}
