#include <cmath>
#include <vector>

#include "doctest.h"
#include "wamtopo_oracle/delaunay_bruteforce.hpp"
#include "wamtopo_oracle/errors.hpp"
#include "wamtopo_oracle/finite_diff.hpp"
#include "wamtopo_oracle/quadrature.hpp"

using Eigen::Vector3d;
namespace oracle = wamtopo_oracle;

TEST_CASE("coplanar segment pairs integrate to zero") {
  // Both segments in the z = 0 plane: the integrand's triple product
  // vanishes identically.
  const Vector3d a0(0.0, 0.0, 0.0), a1(1.0, 0.2, 0.0);
  const Vector3d b0(0.3, 1.0, 0.0), b1(1.4, 1.7, 0.0);
  CHECK(std::abs(oracle::gli_quadrature(a0, a1, b0, b1)) <= 1e-12);

  // Also exactly zero for parallel segments in a common plane.
  const Vector3d c0(0.0, 0.5, 0.0), c1(1.0, 0.5, 0.0);
  CHECK(std::abs(oracle::gli_quadrature(a0, Vector3d(1.0, 0.0, 0.0), c0, c1)) <=
        1e-12);
}

TEST_CASE("64-node and 128-node rules agree to 1e-9 at separations above "
          "0.1") {
  // A deterministic batch of skew pairs with distance > 0.1 m.
  std::uint64_t state = 12345;
  auto next = [&state]() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  };
  int checked = 0;
  while (checked < 20) {
    const Vector3d a0(next(), next(), next());
    const Vector3d a1 = a0 + Vector3d(next(), next(), next());
    const Vector3d b0(next(), next(), next());
    const Vector3d b1 = b0 + Vector3d(next(), next(), next());
    if ((a1 - a0).norm() < 0.2 || (b1 - b0).norm() < 0.2) continue;
    if (oracle::segment_distance_oracle(a0, a1, b0, b1) <= 0.1) continue;
    oracle::QuadratureSpec coarse{64};
    oracle::QuadratureSpec fine{128};
    const double g64 = oracle::gli_quadrature(a0, a1, b0, b1, coarse);
    const double g128 = oracle::gli_quadrature(a0, a1, b0, b1, fine);
    CHECK(std::abs(g64 - g128) <= 1e-9);
    ++checked;
  }
}

TEST_CASE("quadrature front end rejects close pairs and bad rule sizes") {
  const Vector3d a0(0.0, 0.0, 0.0), a1(1.0, 0.0, 0.0);
  const Vector3d b0(0.5, 0.0005, 0.0), b1(0.5, 0.0005, 1.0);  // 5e-4 m away
  CHECK_THROWS_AS(oracle::gli_quadrature(a0, a1, b0, b1),
                  oracle::SegmentsTooClose);

  const Vector3d c0(0.0, 1.0, 0.5), c1(1.0, 1.0, 0.5);
  CHECK_THROWS_AS(
      oracle::gli_quadrature(a0, a1, c0, c1, oracle::QuadratureSpec{1}),
      oracle::OracleError);
  CHECK_THROWS_AS(
      oracle::gli_quadrature(a0, a1, c0, c1, oracle::QuadratureSpec{257}),
      oracle::OracleError);
  CHECK_NOTHROW(
      oracle::gli_quadrature(a0, a1, c0, c1, oracle::QuadratureSpec{2}));
}

TEST_CASE("oracle segment distance is correct on hand-solved cases") {
  const Vector3d a0(0.0, 0.0, 0.0), a1(1.0, 0.0, 0.0);
  // Skew perpendicular line 0.3 above the midpoint.
  CHECK(std::abs(oracle::segment_distance_oracle(
                     a0, a1, Vector3d(0.5, -1.0, 0.3), Vector3d(0.5, 1.0, 0.3)) -
                 0.3) < 1e-9);
  // Closest approach at segment endpoints.
  CHECK(std::abs(oracle::segment_distance_oracle(
                     a0, a1, Vector3d(2.0, 0.0, 0.0), Vector3d(3.0, 0.0, 0.0)) -
                 1.0) < 1e-9);
}

TEST_CASE("brute-force tetrahedralization enforces its size window") {
  Eigen::MatrixX3d too_many(17, 3);
  std::uint64_t state = 77;
  for (int i = 0; i < 17; ++i) {
    for (int j = 0; j < 3; ++j) {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      too_many(i, j) = static_cast<double>(state >> 11) * 0x1.0p-53;
    }
  }
  CHECK_THROWS_AS(oracle::delaunay_bruteforce(too_many),
                  oracle::TooManyPoints);
  CHECK_THROWS_AS(oracle::delaunay_bruteforce(too_many.topRows(3)),
                  oracle::OracleError);

  // Four general-position points form one tetrahedron: the complete graph.
  Eigen::MatrixX3d four(4, 3);
  four << 0.0, 0.0, 0.0,
          1.0, 0.0, 0.1,
          0.0, 1.0, -0.05,
          0.2, 0.3, 1.0;
  const oracle::BruteForceDelaunay result = oracle::delaunay_bruteforce(four);
  REQUIRE(result.tetrahedra.size() == 1);
  CHECK(result.edges.size() == 6);
}

TEST_CASE("finite differences: sin at zero and exact quadratics") {
  auto sine = [](const std::vector<double>& x) { return std::sin(x[0]); };
  const std::vector<double> d =
      oracle::finite_diff(sine, {0.0}, {0}, 1e-5);
  REQUIRE(d.size() == 1);
  CHECK(std::abs(d[0] - 1.0) <= 1e-10);

  auto quadratic = [](const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc;
  };
  const std::vector<double> params = {0.7, -1.3, 2.1, 0.0};
  const std::vector<double> grad =
      oracle::finite_diff(quadratic, params, {0, 1, 2, 3}, 1e-5);
  for (size_t i = 0; i < params.size(); ++i) {
    CHECK(std::abs(grad[i] - 2.0 * params[i]) <= 1e-10);
  }

  CHECK_THROWS_AS(oracle::finite_diff(sine, {0.0}, {4}, 1e-5),
                  oracle::OracleError);
  CHECK_THROWS_AS(oracle::finite_diff(sine, {0.0}, {0}, 0.0),
                  oracle::OracleError);
}
