#pragma once

#include <Eigen/Dense>

namespace wamtopo_oracle {

// Reference evaluation of the Gaussian linking integral of two straight
// segments by direct numerical integration of the double line integral
//
//   (1/4pi) int int ((t1 x t2) . (x1 - x2)) / |x1 - x2|^3 ds dt
//
// using adaptive composite tensor-product Gauss-Legendre: a panel is split
// along its longer parametric side whenever the segment-pair distance times
// `ratio` is smaller than the longest physical panel side, then integrated
// with an n x n rule. This reaches ~1e-9 absolute accuracy for separations
// down to 1e-2 of segment length; a single non-composite rule does not.
//
// Deliberately has no code in common with the closed-form evaluation it is
// used to validate.
double segment_gli_quadrature(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1,
                              const Eigen::Vector3d& b0, const Eigen::Vector3d& b1,
                              int nodes_per_axis = 64, double ratio = 2.0,
                              int max_depth = 40);

// Gauss-Legendre nodes/weights on [0,1], computed by Newton iteration on
// the Legendre polynomial (no table).
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Rule size for the checked front end below.
struct QuadratureSpec {
  int nodes = 64;  // per axis and panel; valid range [2, 256]
};

// Checked front end for segment_gli_quadrature: validates the rule size,
// measures the distance between the two segments with an oracle-local
// closest-point routine, and refuses pairs closer than 1e-3 m, where the
// integrand is too sharply peaked for the target accuracy. Throws
// SegmentsTooClose (distance) or OracleError (bad spec).
double gli_quadrature(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1,
                      const Eigen::Vector3d& b0, const Eigen::Vector3d& b1,
                      const QuadratureSpec& spec = {});

// Minimum distance between two segments (oracle-local implementation).
double segment_distance_oracle(const Eigen::Vector3d& a0,
                               const Eigen::Vector3d& a1,
                               const Eigen::Vector3d& b0,
                               const Eigen::Vector3d& b1);

}  // namespace wamtopo_oracle
