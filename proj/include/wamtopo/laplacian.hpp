#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wamtopo/delaunay.hpp"

namespace wamtopo {

// Graph-Laplacian local coordinates with inverse-distance weights. For each
// vertex i with graph neighbours N(i):
//
//   w_ij   = 1 / |p_j - p_i|
//   alpha_ij = w_ij / sum_k w_ik          (sums to 1 over N(i))
//   delta_i  = p_i - sum_j alpha_ij p_j
//
// delta_i captures how far a point sits from the weighted centroid of its
// neighbours: translation-invariant, rotation-equivariant, and linear in
// scale (the weights themselves are scale-invariant).
struct LaplacianCoords {
  Eigen::MatrixX3d deltas;  // one row per vertex
  // Per-vertex normalized weights, aligned with EdgeSet::adjacency() order.
  std::vector<std::vector<double>> weights;
};

// Throws IsolatedVertexError if any vertex has no incident edge and
// CoincidentPointsError if two adjacent points are closer than 1e-9 m.
LaplacianCoords laplacian_coords(const Eigen::MatrixX3d& points, const EdgeSet& graph);

}  // namespace wamtopo
