#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace wamtopo_oracle {

// Reference Delaunay edge set by definition: enumerate every 4-point subset,
// solve for its circumsphere directly, and keep the tetrahedron when no
// other point lies inside the sphere. Intended for small inputs (n <= 16 or
// so; cost is O(n^5)).
//
// `jittered_points` must already contain whatever symbolic perturbation the
// implementation under test applies, so both sides see identical
// coordinates.
struct BruteForceDelaunay {
  std::vector<std::array<int, 4>> tetrahedra;       // sorted quadruples, sorted list
  std::vector<std::pair<int, int>> edges;           // normalized, sorted
};

BruteForceDelaunay delaunay_bruteforce(const Eigen::MatrixX3d& jittered_points);

}  // namespace wamtopo_oracle
