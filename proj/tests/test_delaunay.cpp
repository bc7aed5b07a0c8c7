#include <doctest.h>

#include "test_util.hpp"
#include "wamtopo/delaunay.hpp"
#include "wamtopo/errors.hpp"
#include "wamtopo_oracle/delaunay_bruteforce.hpp"

using namespace wamtopo;

namespace {

Eigen::MatrixX3d random_points(testutil::TestRng& rng, int n, double lo, double hi) {
  Eigen::MatrixX3d m(n, 3);
  for (int i = 0; i < n; ++i) m.row(i) = rng.vec(lo, hi);
  return m;
}

}  // namespace

TEST_CASE("predicate sign conventions are anchored") {
  const Vec3 a(1, 0, 0), b(0, 1, 0), c(0, 0, 1), d(0, 0, 0);
  CHECK(orient3d(a, b, c, d) > 0.0);
  // Circumsphere of this tetra has center (1/2,1/2,1/2); its center is
  // inside, a far point is outside.
  CHECK(insphere(a, b, c, d, {0.5, 0.5, 0.5}) > 0.0);
  CHECK(insphere(a, b, c, d, {10, 10, 10}) < 0.0);
  // Swapping two vertices flips both signs.
  CHECK(orient3d(b, a, c, d) < 0.0);
  CHECK(insphere(b, a, c, d, {0.5, 0.5, 0.5}) < 0.0);
}

TEST_CASE("delaunay_edges of a single tetrahedron is the complete graph") {
  Eigen::MatrixX3d pts(4, 3);
  pts << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  const EdgeSet e = delaunay_edges(pts);
  CHECK(e.n_vertices == 4);
  CHECK(e.edges.size() == 6);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) CHECK(e.contains(i, j));
  }
}

TEST_CASE("delaunay_edges connects a cube center to every corner") {
  Eigen::MatrixX3d pts(9, 3);
  int r = 0;
  for (int x = 0; x <= 1; ++x) {
    for (int y = 0; y <= 1; ++y) {
      for (int z = 0; z <= 1; ++z) pts.row(r++) = Vec3(x, y, z);
    }
  }
  pts.row(8) = Vec3(0.5, 0.5, 0.5);
  const EdgeSet e = delaunay_edges(pts);
  // The center is strictly inside every corner-adjacent circumsphere, so it
  // must link to all 8 corners; cube face diagonals are tie-broken by the
  // symbolic jitter but corner-to-center edges are unambiguous.
  for (int i = 0; i < 8; ++i) CHECK(e.contains(i, 8));
  // Cube edges themselves are Delaunay.
  CHECK(e.contains(0, 1));
  CHECK(e.contains(0, 2));
  CHECK(e.contains(0, 4));
}

TEST_CASE("delaunay_edges matches the brute-force reference on random sets") {
  for (int trial = 0; trial < 12; ++trial) {
    testutil::TestRng rng(100 + static_cast<std::uint64_t>(trial));
    const int n = 6 + static_cast<int>(rng.next_u64() % 9);  // 6..14
    const Eigen::MatrixX3d pts = random_points(rng, n, -1.0, 1.0);
    const EdgeSet fast = delaunay_edges(pts);
    const auto brute = wamtopo_oracle::delaunay_bruteforce(jitter_points(pts));
    REQUIRE(fast.edges == brute.edges);
    CHECK(delaunay_tetrahedra(pts) == brute.tetrahedra);
  }
}

TEST_CASE("delaunay_edges matches brute force at a far-away offset") {
  testutil::TestRng rng(777);
  Eigen::MatrixX3d pts = random_points(rng, 10, -0.5, 0.5);
  pts.rowwise() += Eigen::RowVector3d(1000.0, -500.0, 250.0);
  const EdgeSet fast = delaunay_edges(pts);
  const auto brute = wamtopo_oracle::delaunay_bruteforce(jitter_points(pts));
  CHECK(fast.edges == brute.edges);
}

TEST_CASE("delaunay_edges rejects degenerate input") {
  CHECK_THROWS_AS(delaunay_edges(Eigen::MatrixX3d::Zero(3, 3)), TooFewPointsError);
  // All points identical: the jitter scale collapses with the bounding box,
  // so the set stays affinely dependent.
  CHECK_THROWS_AS(delaunay_edges(Eigen::MatrixX3d::Zero(5, 3)), DegenerateInputError);
}

TEST_CASE("jitter_points is deterministic and bounded") {
  testutil::TestRng rng(31);
  const Eigen::MatrixX3d pts = random_points(rng, 12, -2.0, 2.0);
  const Eigen::MatrixX3d j1 = jitter_points(pts);
  const Eigen::MatrixX3d j2 = jitter_points(pts);
  CHECK((j1 - j2).cwiseAbs().maxCoeff() == 0.0);
  const double diag = (pts.colwise().maxCoeff() - pts.colwise().minCoeff()).norm();
  CHECK((j1 - pts).cwiseAbs().maxCoeff() <= kJitterRelativeScale * diag);
  CHECK((j1 - pts).cwiseAbs().maxCoeff() > 0.0);
}
