#pragma once

#include <cstdint>
#include <random>

namespace wamtopo {

// Deterministic random stream. The engine is std::mt19937_64 (bit-exact by
// the standard); the real-valued draws are implemented here rather than with
// std::*_distribution so that sequences are reproducible across standard
// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1): the top 53 bits of one draw.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via the Box-Muller transform; generates values in pairs
  // and caches the second one.
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace wamtopo
