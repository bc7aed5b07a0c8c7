#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "wamtopo/delaunay.hpp"
#include "wamtopo/errors.hpp"
#include "wamtopo/laplacian.hpp"

using namespace wamtopo;

namespace {

EdgeSet path_graph(int n) {
  EdgeSet e;
  e.n_vertices = n;
  for (int i = 0; i + 1 < n; ++i) e.edges.emplace_back(i, i + 1);
  return e;
}

Eigen::MatrixX3d random_points(testutil::TestRng& rng, int n) {
  Eigen::MatrixX3d m(n, 3);
  for (int i = 0; i < n; ++i) m.row(i) = rng.vec(-1, 1);
  return m;
}

}  // namespace

TEST_CASE("laplacian_coords reproduces a hand-computed delta") {
  // Vertex 1 neighbours 0 and 2. With inverse-distance weights the weighted
  // neighbour centroid lands at x = sqrt5 - 1, so delta_1 = (2 - sqrt5, 1, 0).
  Eigen::MatrixX3d pts(3, 3);
  pts << 0, 0, 0, 1, 1, 0, 4, 0, 0;
  const LaplacianCoords lc = laplacian_coords(pts, path_graph(3));
  CHECK(lc.deltas(1, 0) == doctest::Approx(2.0 - std::sqrt(5.0)).epsilon(1e-12));
  CHECK(lc.deltas(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(lc.deltas(1, 2)) < 1e-15);
  // An endpoint's delta points away from its single neighbour.
  CHECK(lc.deltas(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(lc.deltas(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("laplacian weights are positive and sum to one per vertex") {
  testutil::TestRng rng(41);
  const Eigen::MatrixX3d pts = random_points(rng, 10);
  const EdgeSet graph = delaunay_edges(pts);
  const LaplacianCoords lc = laplacian_coords(pts, graph);
  for (const auto& w : lc.weights) {
    double sum = 0.0;
    for (const double v : w) {
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("laplacian deltas are translation-invariant and rotation-equivariant") {
  testutil::TestRng rng(42);
  const Eigen::MatrixX3d pts = random_points(rng, 9);
  const EdgeSet graph = delaunay_edges(pts);
  const LaplacianCoords base = laplacian_coords(pts, graph);

  // Translation leaves deltas untouched (same graph).
  Eigen::MatrixX3d shifted = pts;
  shifted.rowwise() += Eigen::RowVector3d(3.0, -1.0, 0.5);
  const LaplacianCoords tr = laplacian_coords(shifted, graph);
  CHECK((tr.deltas - base.deltas).cwiseAbs().maxCoeff() < 1e-12);

  // Rotation rotates deltas.
  const Mat3 rot = rot_z(1.1) * rot_x(-0.6);
  Eigen::MatrixX3d rotated = (rot * pts.transpose()).transpose();
  const LaplacianCoords rr = laplacian_coords(rotated, graph);
  CHECK((rr.deltas - (rot * base.deltas.transpose()).transpose()).cwiseAbs().maxCoeff() < 1e-12);

  // Scaling scales deltas linearly and leaves the weights unchanged.
  const LaplacianCoords sc = laplacian_coords(2.5 * pts, graph);
  CHECK((sc.deltas - 2.5 * base.deltas).cwiseAbs().maxCoeff() < 1e-12);
  for (size_t i = 0; i < base.weights.size(); ++i) {
    for (size_t k = 0; k < base.weights[i].size(); ++k) {
      CHECK(std::abs(sc.weights[i][k] - base.weights[i][k]) < 1e-12);
    }
  }
}

TEST_CASE("laplacian_coords rejects isolated vertices and coincident neighbours") {
  Eigen::MatrixX3d pts(4, 3);
  pts << 0, 0, 0, 1, 0, 0, 0, 1, 0, 5, 5, 5;
  EdgeSet graph;
  graph.n_vertices = 4;
  graph.edges = {{0, 1}, {0, 2}, {1, 2}};  // vertex 3 isolated
  CHECK_THROWS_AS(laplacian_coords(pts, graph), IsolatedVertexError);

  Eigen::MatrixX3d dup(3, 3);
  dup << 0, 0, 0, 1e-12, 0, 0, 1, 1, 1;
  CHECK_THROWS_AS(laplacian_coords(dup, path_graph(3)), CoincidentPointsError);

  CHECK_THROWS_AS(laplacian_coords(pts, path_graph(3)), ShapeMismatchError);
}
