#pragma once

#include <Eigen/Dense>
#include <string>

#include "wamtopo/curve_set.hpp"
#include "wamtopo/gli.hpp"
#include "wamtopo/polyline.hpp"

namespace wamtopo {

// Pairwise segment linking matrix between two curves. entries(i, j) is the
// Gaussian linking integral of segment i of the row curve with segment j of
// the column curve, so the matrix is n1_segments x n2_segments and its entry
// sum equals curve_gli(row, col).
struct WritheMatrix {
  Eigen::MatrixXd entries;
  std::string row_curve_id;
  std::string col_curve_id;
  bool saturated = false;  // clamped mode only: any pair was pushed apart
};

// Strict mode (throws on degenerate/intersecting segment pairs).
WritheMatrix writhe_matrix(const Polyline& row_curve, const Polyline& col_curve);

// Clamped mode for noisy machine-generated geometry.
WritheMatrix writhe_matrix_clamped(const Polyline& row_curve, const Polyline& col_curve);

// Combined interaction matrix for the upright scenario, 20 x 14:
//
//   rows 0-9   [ W(h_r,  r_r) | W(h_l,  r_l) ]
//   rows 10-19 [ W(h_arm,r_r) | W(h_arm,r_l) ]
//
// columns 0-6 are the right-arm segments, 7-13 the left-arm segments.
// Robot curves must have 7 segments; humanoid curves 10 segments each.
Eigen::MatrixXd combined_writhe_upright(const RobotCurves& robot,
                                        const HumanoidCurves& humanoid,
                                        bool* saturated = nullptr);

// Combined interaction matrix for the horizontal scenario, 15 x 14: each
// humanoid body column is split at its middle, the upper halves interact
// with the right arm and the lower halves with the left arm:
//
//   rows 0-4   [ W(h_r_upper, r_r) | W(h_r_lower, r_l) ]
//   rows 5-9   [ W(h_c_upper, r_r) | W(h_c_lower, r_l) ]
//   rows 10-14 [ W(h_l_upper, r_r) | W(h_l_lower, r_l) ]
Eigen::MatrixXd combined_writhe_horizontal(const RobotCurves& robot,
                                           const HumanoidCurves& humanoid,
                                           bool* saturated = nullptr);

// Shape of the combined matrix for a scenario: {rows, cols}.
std::pair<int, int> combined_writhe_shape(Scenario scenario);

}  // namespace wamtopo
