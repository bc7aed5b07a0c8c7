#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "wamtopo/geometry.hpp"

namespace wamtopo {

// Undirected graph over point indices. Edges are stored normalized
// (first < second) and sorted, so iteration order is deterministic.
struct EdgeSet {
  int n_vertices = 0;
  std::vector<std::pair<int, int>> edges;

  bool contains(int i, int j) const;
  // Neighbour lists per vertex, in ascending index order.
  std::vector<std::vector<int>> adjacency() const;
};

bool operator==(const EdgeSet& a, const EdgeSet& b);

// Deterministic symbolic perturbation applied before tetrahedralization:
// each point is displaced by (bbox diagonal * 1e-9) * u_i, where u_i is a
// per-index pseudo-random offset in [-1,1]^3 derived from splitmix64 of the
// point index. The same function is applied by every consumer (including
// reference implementations), so results compare exactly.
Eigen::MatrixX3d jitter_points(const Eigen::MatrixX3d& points);

// Relative magnitude of the symbolic jitter.
inline constexpr double kJitterRelativeScale = 1e-9;

// Geometric predicates shared by the tetrahedralization. Evaluated in
// extended (long double) precision.
//
// orient3d > 0 means d sees triangle (a,b,c) in counterclockwise winding;
// for such an ordering (a,b,c,d) the tetrahedron is positively oriented and
// insphere > 0 means e lies strictly inside its circumsphere.
double orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
double insphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d,
                const Vec3& e);

// Edges of the 3D Delaunay tetrahedralization of `points` (rows), computed
// by incremental insertion with ghost tetrahedra covering the outside of the
// hull. The symbolic jitter above is always applied first.
//
// Throws TooFewPointsError for fewer than 4 points and DegenerateInputError
// if the jittered points are still affinely dependent.
EdgeSet delaunay_edges(const Eigen::MatrixX3d& points);

// The tetrahedra themselves (vertex index quadruples, each sorted
// ascending; list sorted lexicographically). Exposed for validation.
std::vector<std::array<int, 4>> delaunay_tetrahedra(const Eigen::MatrixX3d& points);

}  // namespace wamtopo
