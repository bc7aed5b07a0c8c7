#include "wamtopo/writhe.hpp"

#include "wamtopo/errors.hpp"

namespace wamtopo {

namespace {

template <bool Clamped>
WritheMatrix build_writhe(const Polyline& row_curve, const Polyline& col_curve) {
  WritheMatrix w;
  w.row_curve_id = row_curve.id();
  w.col_curve_id = col_curve.id();
  w.entries.resize(row_curve.n_segments(), col_curve.n_segments());
  for (int i = 0; i < row_curve.n_segments(); ++i) {
    const auto [a0, a1] = row_curve.segment(i);
    for (int j = 0; j < col_curve.n_segments(); ++j) {
      const auto [b0, b1] = col_curve.segment(j);
      if constexpr (Clamped) {
        const ClampedGli g = segment_gli_clamped(a0, a1, b0, b1);
        w.entries(i, j) = g.value;
        w.saturated = w.saturated || g.saturated;
      } else {
        w.entries(i, j) = segment_gli(a0, a1, b0, b1);
      }
    }
  }
  return w;
}

void require_segments(const Polyline& c, int want, const char* role) {
  if (c.n_segments() != want) {
    throw ShapeMismatchError(std::string(role) + " curve '" + c.id() + "' must have " +
                             std::to_string(want) + " segments, got " +
                             std::to_string(c.n_segments()));
  }
}

}  // namespace

WritheMatrix writhe_matrix(const Polyline& row_curve, const Polyline& col_curve) {
  return build_writhe<false>(row_curve, col_curve);
}

WritheMatrix writhe_matrix_clamped(const Polyline& row_curve, const Polyline& col_curve) {
  return build_writhe<true>(row_curve, col_curve);
}

Eigen::MatrixXd combined_writhe_upright(const RobotCurves& robot,
                                        const HumanoidCurves& humanoid,
                                        bool* saturated) {
  require_segments(robot.right, 7, "robot right");
  require_segments(robot.left, 7, "robot left");
  require_segments(humanoid.side_r, 10, "humanoid side_r");
  require_segments(humanoid.side_l, 10, "humanoid side_l");
  require_segments(humanoid.arm_ring, 10, "humanoid arm_ring");

  bool sat = false;
  auto block = [&sat](const Polyline& row, const Polyline& col) {
    WritheMatrix w = writhe_matrix_clamped(row, col);
    sat = sat || w.saturated;
    return w.entries;
  };

  Eigen::MatrixXd m(20, 14);
  m.block(0, 0, 10, 7) = block(humanoid.side_r, robot.right);
  m.block(0, 7, 10, 7) = block(humanoid.side_l, robot.left);
  m.block(10, 0, 10, 7) = block(humanoid.arm_ring, robot.right);
  m.block(10, 7, 10, 7) = block(humanoid.arm_ring, robot.left);
  if (saturated) *saturated = sat;
  return m;
}

Eigen::MatrixXd combined_writhe_horizontal(const RobotCurves& robot,
                                           const HumanoidCurves& humanoid,
                                           bool* saturated) {
  require_segments(robot.right, 7, "robot right");
  require_segments(robot.left, 7, "robot left");
  require_segments(humanoid.side_r_upper, 5, "humanoid side_r_upper");
  require_segments(humanoid.side_r_lower, 5, "humanoid side_r_lower");
  require_segments(humanoid.center_upper, 5, "humanoid center_upper");
  require_segments(humanoid.center_lower, 5, "humanoid center_lower");
  require_segments(humanoid.side_l_upper, 5, "humanoid side_l_upper");
  require_segments(humanoid.side_l_lower, 5, "humanoid side_l_lower");

  bool sat = false;
  auto block = [&sat](const Polyline& row, const Polyline& col) {
    WritheMatrix w = writhe_matrix_clamped(row, col);
    sat = sat || w.saturated;
    return w.entries;
  };

  Eigen::MatrixXd m(15, 14);
  m.block(0, 0, 5, 7) = block(humanoid.side_r_upper, robot.right);
  m.block(0, 7, 5, 7) = block(humanoid.side_r_lower, robot.left);
  m.block(5, 0, 5, 7) = block(humanoid.center_upper, robot.right);
  m.block(5, 7, 5, 7) = block(humanoid.center_lower, robot.left);
  m.block(10, 0, 5, 7) = block(humanoid.side_l_upper, robot.right);
  m.block(10, 7, 5, 7) = block(humanoid.side_l_lower, robot.left);
  if (saturated) *saturated = sat;
  return m;
}

std::pair<int, int> combined_writhe_shape(Scenario scenario) {
  return scenario == Scenario::kUpright ? std::pair<int, int>{20, 14}
                                        : std::pair<int, int>{15, 14};
}

}  // namespace wamtopo
