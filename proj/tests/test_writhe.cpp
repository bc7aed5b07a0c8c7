#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "wamtopo/errors.hpp"
#include "wamtopo/linking.hpp"
#include "wamtopo/writhe.hpp"

using namespace wamtopo;

namespace {

// Straight test curve with n points between two endpoints.
Polyline straight(const Vec3& from, const Vec3& to, int n, const std::string& id) {
  std::vector<Vec3> pts(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    pts[static_cast<size_t>(i)] = from + t * (to - from);
  }
  return Polyline(pts, id);
}

// Gentle helix around the z axis, n points.
Polyline helix(double radius, double z0, double z1, double turns, int n, const std::string& id) {
  std::vector<Vec3> pts(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    const double th = 2.0 * M_PI * turns * t;
    pts[static_cast<size_t>(i)] = {radius * std::cos(th), radius * std::sin(th),
                                   z0 + t * (z1 - z0)};
  }
  return Polyline(pts, id);
}

// A synthetic but well-formed curve set: robot curves have 8 points, full
// humanoid curves 11 points, all mutually separated.
CurveSet synthetic_curve_set() {
  CurveSet cs;
  cs.robot.right = helix(0.45, 0.2, 0.9, 0.6, 8, "r_r");
  cs.robot.left = helix(0.55, 0.1, 1.0, -0.5, 8, "r_l");
  cs.humanoid.center = straight({0.02, 0.01, 0.0}, {0.03, -0.02, 1.4}, 11, "h_c");
  cs.humanoid.side_r = straight({0.05, -0.18, 0.0}, {0.02, -0.20, 1.3}, 11, "h_r");
  cs.humanoid.side_l = straight({0.05, 0.18, 0.0}, {0.02, 0.20, 1.3}, 11, "h_l");
  cs.humanoid.arm_ring = helix(0.30, 1.05, 1.12, 0.45, 11, "h_arm");
  fill_half_curves(cs.humanoid);
  cs.humanoid.shoulder_r = {0.0, -0.2, 1.2};
  cs.humanoid.shoulder_l = {0.0, 0.2, 1.2};
  return cs;
}

}  // namespace

TEST_CASE("writhe_matrix has segment-pair shape and sums to curve_gli") {
  testutil::TestRng rng(21);
  const Polyline c1 = testutil::random_polyline(rng, 9, -1.0, 0.4);
  const Polyline c2 = testutil::random_polyline(rng, 6, 0.6, 2.0);
  const WritheMatrix w = writhe_matrix(c1, c2);
  CHECK(w.entries.rows() == 8);
  CHECK(w.entries.cols() == 5);
  CHECK(std::abs(w.entries.sum() - curve_gli(c1, c2)) < 1e-9);
}

TEST_CASE("writhe_matrix transposes under curve swap") {
  testutil::TestRng rng(22);
  const Polyline c1 = testutil::random_polyline(rng, 7, -1.0, 0.4);
  const Polyline c2 = testutil::random_polyline(rng, 7, 0.6, 2.0);
  const WritheMatrix w12 = writhe_matrix(c1, c2);
  const WritheMatrix w21 = writhe_matrix(c2, c1);
  CHECK((w12.entries - w21.entries.transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("writhe_matrix negates and reverses rows when the row curve flips") {
  testutil::TestRng rng(23);
  const Polyline c1 = testutil::random_polyline(rng, 6, -1.0, 0.4);
  const Polyline c2 = testutil::random_polyline(rng, 6, 0.6, 2.0);
  const WritheMatrix w = writhe_matrix(c1, c2);
  const WritheMatrix wr = writhe_matrix(c1.reversed(), c2);
  CHECK((wr.entries + w.entries.colwise().reverse()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("writhe_matrix entries are invariant under shared rigid motion") {
  testutil::TestRng rng(24);
  const Polyline c1 = testutil::random_polyline(rng, 8, -1.0, 0.4);
  const Polyline c2 = testutil::random_polyline(rng, 8, 0.6, 2.0);
  const Mat3 rot = rot_x(0.4) * rot_z(-1.3);
  const Vec3 tr(-3.0, 7.0, 0.5);
  const WritheMatrix w = writhe_matrix(c1, c2);
  const WritheMatrix wr = writhe_matrix(c1.transformed(rot, tr), c2.transformed(rot, tr));
  CHECK((w.entries - wr.entries).cwiseAbs().maxCoeff() < 1e-9);
  const WritheMatrix ws = writhe_matrix(c1.scaled(2.5), c2.scaled(2.5));
  CHECK((w.entries - ws.entries).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("combined_writhe_upright lays out its four blocks as documented") {
  const CurveSet cs = synthetic_curve_set();
  const Eigen::MatrixXd m = combined_writhe_upright(cs.robot, cs.humanoid);
  CHECK(m.rows() == 20);
  CHECK(m.cols() == 14);
  CHECK((m.block(0, 0, 10, 7) - writhe_matrix(cs.humanoid.side_r, cs.robot.right).entries)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((m.block(0, 7, 10, 7) - writhe_matrix(cs.humanoid.side_l, cs.robot.left).entries)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((m.block(10, 0, 10, 7) - writhe_matrix(cs.humanoid.arm_ring, cs.robot.right).entries)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((m.block(10, 7, 10, 7) - writhe_matrix(cs.humanoid.arm_ring, cs.robot.left).entries)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("combined_writhe_horizontal pairs upper halves right and lower halves left") {
  const CurveSet cs = synthetic_curve_set();
  const Eigen::MatrixXd m = combined_writhe_horizontal(cs.robot, cs.humanoid);
  CHECK(m.rows() == 15);
  CHECK(m.cols() == 14);
  CHECK((m.block(0, 0, 5, 7) - writhe_matrix(cs.humanoid.side_r_upper, cs.robot.right).entries)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((m.block(5, 7, 5, 7) - writhe_matrix(cs.humanoid.center_lower, cs.robot.left).entries)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((m.block(10, 0, 5, 7) - writhe_matrix(cs.humanoid.side_l_upper, cs.robot.right).entries)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("combined_writhe rejects wrong curve sizes") {
  CurveSet cs = synthetic_curve_set();
  cs.robot.right = straight({0.4, -0.4, 0.2}, {0.5, -0.5, 1.0}, 5, "r_r");
  CHECK_THROWS_AS(combined_writhe_upright(cs.robot, cs.humanoid), ShapeMismatchError);
}

TEST_CASE("split_at_middle shares the middle point and keeps orientation") {
  const Polyline c = straight({0, 0, 0}, {0, 0, 1}, 11, "c");
  const auto [lower, upper] = split_at_middle(c);
  CHECK(lower.n_points() == 6);
  CHECK(upper.n_points() == 6);
  CHECK((lower.point(5) - upper.point(0)).norm() == 0.0);
  CHECK((lower.point(0) - c.point(0)).norm() == 0.0);
  CHECK((upper.point(5) - c.point(10)).norm() == 0.0);
  CHECK_THROWS_AS(split_at_middle(straight({0, 0, 0}, {0, 0, 1}, 8, "even")), ShapeMismatchError);
}

TEST_CASE("total_linking accumulates absolute pair integrals") {
  const CurveSet cs = synthetic_curve_set();
  const double up = total_linking(cs, Scenario::kUpright);
  const double expected = std::abs(curve_gli(cs.robot.left, cs.humanoid.side_l)) +
                          std::abs(curve_gli(cs.robot.left, cs.humanoid.arm_ring)) +
                          std::abs(curve_gli(cs.robot.right, cs.humanoid.side_r)) +
                          std::abs(curve_gli(cs.robot.right, cs.humanoid.arm_ring));
  CHECK(std::abs((up) - (expected)) < 1e-14);
  CHECK(up >= 0.0);

  const double hz = total_linking(cs, Scenario::kHorizontal);
  const double hz_expected = std::abs(curve_gli(cs.robot.right, cs.humanoid.side_r_upper)) +
                             std::abs(curve_gli(cs.robot.right, cs.humanoid.center_upper)) +
                             std::abs(curve_gli(cs.robot.right, cs.humanoid.side_l_upper)) +
                             std::abs(curve_gli(cs.robot.left, cs.humanoid.side_r_lower)) +
                             std::abs(curve_gli(cs.robot.left, cs.humanoid.center_lower)) +
                             std::abs(curve_gli(cs.robot.left, cs.humanoid.side_l_lower));
  CHECK(std::abs((hz) - (hz_expected)) < 1e-14);

  // Clamped mode agrees on clean geometry and reports no saturation.
  const ClampedGli cu = total_linking_clamped(cs, Scenario::kUpright);
  CHECK_FALSE(cu.saturated);
  CHECK(cu.value == up);
}
