#include "wamtopo/laplacian.hpp"

#include <string>

#include "wamtopo/errors.hpp"

namespace wamtopo {

LaplacianCoords laplacian_coords(const Eigen::MatrixX3d& points, const EdgeSet& graph) {
  const int n = static_cast<int>(points.rows());
  if (graph.n_vertices != n) {
    throw ShapeMismatchError("graph has " + std::to_string(graph.n_vertices) +
                             " vertices but " + std::to_string(n) + " points were given");
  }
  const auto adj = graph.adjacency();

  LaplacianCoords out;
  out.deltas.resize(n, 3);
  out.weights.resize(static_cast<size_t>(n));

  for (int i = 0; i < n; ++i) {
    const auto& nbrs = adj[static_cast<size_t>(i)];
    if (nbrs.empty()) {
      throw IsolatedVertexError("vertex " + std::to_string(i) + " has no incident edges");
    }
    std::vector<double>& w = out.weights[static_cast<size_t>(i)];
    w.resize(nbrs.size());
    double wsum = 0.0;
    for (size_t k = 0; k < nbrs.size(); ++k) {
      const double d = (points.row(nbrs[k]) - points.row(i)).norm();
      if (d < 1e-9) {
        throw CoincidentPointsError("adjacent vertices " + std::to_string(i) + "," +
                                    std::to_string(nbrs[k]) + " are closer than 1e-9 m");
      }
      w[k] = 1.0 / d;
      wsum += w[k];
    }
    Eigen::RowVector3d centroid = Eigen::RowVector3d::Zero();
    for (size_t k = 0; k < nbrs.size(); ++k) {
      w[k] /= wsum;
      centroid += w[k] * points.row(nbrs[k]);
    }
    out.deltas.row(i) = points.row(i) - centroid;
  }
  return out;
}

}  // namespace wamtopo
