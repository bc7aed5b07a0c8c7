#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "wamtopo/geometry.hpp"
#include "wamtopo/polyline.hpp"

namespace testutil {

// Small deterministic generator for test geometry (SplitMix64 stream).
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

  wamtopo::Vec3 vec(double lo, double hi) {
    const double x = uniform(lo, hi);
    const double y = uniform(lo, hi);
    const double z = uniform(lo, hi);
    return {x, y, z};
  }

 private:
  std::uint64_t state_;
};

// Random polyline with n points inside [lo,hi]^3, rejecting tiny steps.
inline wamtopo::Polyline random_polyline(TestRng& rng, int n, double lo, double hi) {
  std::vector<wamtopo::Vec3> pts;
  pts.reserve(static_cast<size_t>(n));
  while (static_cast<int>(pts.size()) < n) {
    wamtopo::Vec3 p = rng.vec(lo, hi);
    if (!pts.empty() && (p - pts.back()).norm() < 1e-3) continue;
    pts.push_back(p);
  }
  return wamtopo::Polyline(pts);
}

}  // namespace testutil
