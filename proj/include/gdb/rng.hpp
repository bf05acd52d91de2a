#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gdb {

// Seeded generator with platform-independent derived draws. The standard
// distributions are implementation-defined, so every draw here is computed
// directly from mt19937_64 output.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for (seed, tag...) without consuming from a parent.
  static Rng derive(std::uint64_t seed, std::uint64_t tag_a, std::uint64_t tag_b = 0);

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }

  // Uniform in [0, bound), rejection-sampled.
  std::uint64_t below(std::uint64_t bound);

  std::vector<std::uint8_t> bytes(std::size_t n);

  template <typename T> void shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace gdb
