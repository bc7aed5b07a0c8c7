#include <cmath>
#include <cstdio>
#include <doctest.h>

#include "wamtopo/body.hpp"
#include "wamtopo/errors.hpp"
#include "test_util.hpp"

using namespace wamtopo;

namespace {

constexpr double kPi = 3.14159265358979323846;

CurveSet standard_upright_set() {
  const ArmKinematicModel arm = ArmKinematicModel::builtin();
  const HumanoidModel humanoid = HumanoidModel::from_preset(HumanoidPreset::kStandard);
  CurveSet cs;
  cs.robot = robot_curves(arm, rest_joints(arm));
  cs.humanoid = humanoid_curves(humanoid, upright_pose(Vec3(0.45, 0.0, 0.35)));
  return cs;
}

double point_to_polyline(const Vec3& p, const Polyline& c) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.n_segments(); ++i) {
    const auto [s0, s1] = c.segment(i);
    best = std::min(best, point_segment_distance(p, s0, s1));
  }
  return best;
}

}  // namespace

TEST_CASE("builtin arm model is valid with ~1.0 m reach") {
  const ArmKinematicModel m = ArmKinematicModel::builtin();
  CHECK_NOTHROW(m.validate());
  CHECK(std::abs(m.total_reach() - 1.0) < 1e-12);
  CHECK(m.joints.size() == 7);
  // Alternating yaw/pitch/twist chain.
  CHECK(m.joints[0].axis == 'z');
  CHECK(m.joints[1].axis == 'y');
  CHECK(m.joints[2].axis == 'x');
  CHECK(m.joints[3].axis == 'y');
  CHECK(m.joints[4].axis == 'x');
  CHECK(m.joints[5].axis == 'y');
  CHECK(m.joints[6].axis == 'x');
}

TEST_CASE("all-zero joints give the straight canonical polylines") {
  // With every angle zero each link frame keeps the base orientation, so
  // point k sits at base + (cumulative link length) * base_rot * ex. This
  // closed form is evaluated directly here, independent of the chain loop.
  const ArmKinematicModel m = ArmKinematicModel::builtin();
  const RobotCurves rc = robot_curves(m, JointVector::Zero());

  double cum[8] = {0.0};
  for (int k = 0; k < 7; ++k) {
    cum[k + 1] = cum[k] + m.joints[static_cast<size_t>(k)].offset.norm();
  }
  const Vec3 dir_r = m.base_rot_right * Vec3(1, 0, 0);
  const Vec3 dir_l = m.base_rot_left * Vec3(1, 0, 0);
  REQUIRE(rc.right.n_points() == 8);
  REQUIRE(rc.left.n_points() == 8);
  for (int k = 0; k < 8; ++k) {
    const Vec3 expect_r = m.base_pos_right + cum[k] * dir_r;
    const Vec3 expect_l = m.base_pos_left + cum[k] * dir_l;
    CHECK((rc.right.point(k) - expect_r).norm() < 1e-12);
    CHECK((rc.left.point(k) - expect_l).norm() < 1e-12);
    // The straight arms are mirror images across the x-z plane.
    CHECK(std::abs(rc.right.point(k).x() - rc.left.point(k).x()) < 1e-12);
    CHECK(std::abs(rc.right.point(k).y() + rc.left.point(k).y()) < 1e-12);
    CHECK(std::abs(rc.right.point(k).z() - rc.left.point(k).z()) < 1e-12);
  }
  // End effector exactly one full reach from the base.
  CHECK(std::abs((rc.right.point(7) - rc.right.point(0)).norm() - 1.0) < 1e-12);
}

TEST_CASE("rotating the shoulder yaw by pi reflects the arm through its base") {
  // The base mount rotation and shoulder yaw share the z axis, so a pi yaw
  // turns the whole chain by pi about the vertical through the base. Joint
  // limits are widened for this probe; the geometry is model-independent.
  ArmKinematicModel m = ArmKinematicModel::builtin();
  m.joints[0].lower = -3.2;
  m.joints[0].upper = 3.2;
  m.rest_pose_right = {0, 0, 0, 0, 0, 0, 0};

  JointVector zero = JointVector::Zero();
  JointVector yawed = JointVector::Zero();
  yawed[7] = kPi;  // right arm shoulder yaw
  const Polyline base_curve = robot_curves(m, zero).right;
  const Polyline turned = robot_curves(m, yawed).right;
  const Vec3 base = m.base_pos_right;
  for (int k = 0; k < 8; ++k) {
    const Vec3 v = base_curve.point(k) - base;
    const Vec3 w = turned.point(k) - base;
    CHECK(std::abs(w.x() + v.x()) < 1e-12);
    CHECK(std::abs(w.y() + v.y()) < 1e-12);
    CHECK(std::abs(w.z() - v.z()) < 1e-12);
  }
}

TEST_CASE("joint limit violations name the offending indices") {
  const ArmKinematicModel m = ArmKinematicModel::builtin();
  JointVector j = rest_joints(m);
  j[0] = 2.0;    // left shoulder yaw beyond +1.7
  j[8] = -2.5;   // right shoulder pitch beyond -2.1
  try {
    robot_curves(m, j);
    FAIL("expected JointLimitError");
  } catch (const JointLimitError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(" 0") != std::string::npos);
    CHECK(msg.find(" 8") != std::string::npos);
  }
  JointVector nan_joints = rest_joints(m);
  nan_joints[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(robot_curves(m, nan_joints), JointLimitError);
  // Clamping always yields a valid configuration.
  CHECK_NOTHROW(robot_curves(m, clamp_to_limits(m, j)));
}

TEST_CASE("forward kinematics is continuous in the joint angles") {
  const ArmKinematicModel m = ArmKinematicModel::builtin();
  const auto [lo, hi] = joint_limits(m);
  testutil::TestRng rng(0x00B0D7);
  for (int trial = 0; trial < 20; ++trial) {
    JointVector j;
    for (int k = 0; k < 14; ++k) {
      j[k] = rng.uniform(lo[k] + 1e-5, hi[k] - 1e-5);
    }
    const RobotCurves a = robot_curves(m, j);
    JointVector jp = j;
    for (int k = 0; k < 14; ++k) jp[k] += (k % 2 == 0 ? 1e-6 : -1e-6);
    const RobotCurves b = robot_curves(m, jp);
    for (int k = 0; k < 8; ++k) {
      CHECK((a.right.point(k) - b.right.point(k)).norm() <= 1e-4);
      CHECK((a.left.point(k) - b.left.point(k)).norm() <= 1e-4);
    }
  }
}

TEST_CASE("rest configuration mirrors yaw and twist joints") {
  const ArmKinematicModel m = ArmKinematicModel::builtin();
  const JointVector j = rest_joints(m);
  const auto [lo, hi] = joint_limits(m);
  for (int k = 0; k < 14; ++k) {
    CHECK(j[k] >= lo[k]);
    CHECK(j[k] <= hi[k]);
  }
  for (int k = 0; k < 7; ++k) {
    const char axis = m.joints[static_cast<size_t>(k)].axis;
    if (axis == 'y') {
      CHECK(j[k] == j[7 + k]);
    } else {
      CHECK(j[k] == -j[7 + k]);
    }
  }
  // The mirrored rest stance itself is mirror-symmetric geometrically.
  const RobotCurves rc = robot_curves(m, j);
  for (int k = 0; k < 8; ++k) {
    CHECK(std::abs(rc.right.point(k).x() - rc.left.point(k).x()) < 1e-12);
    CHECK(std::abs(rc.right.point(k).y() + rc.left.point(k).y()) < 1e-12);
    CHECK(std::abs(rc.right.point(k).z() - rc.left.point(k).z()) < 1e-12);
  }
}

TEST_CASE("humanoid presets follow the documented dimension table") {
  const HumanoidModel std_m = HumanoidModel::from_preset(HumanoidPreset::kStandard);
  CHECK(std_m.torso_height == 0.60);
  CHECK(std_m.shoulder_width == 0.45);
  CHECK(std_m.torso_depth == 0.20);
  CHECK(std_m.arm_length == 0.55);
  CHECK(std_m.neck_length == 0.10);

  const HumanoidModel slim = HumanoidModel::from_preset(HumanoidPreset::kSlim);
  CHECK(slim.torso_height == 0.60);
  CHECK(std::abs(slim.shoulder_width - 0.3375) < 1e-15);
  CHECK(std::abs(slim.torso_depth - 0.15) < 1e-15);
  CHECK(slim.arm_length == 0.55);

  const HumanoidModel stout = HumanoidModel::from_preset(HumanoidPreset::kStout);
  CHECK(std::abs(stout.torso_height - 0.48) < 1e-15);
  CHECK(std::abs(stout.shoulder_width - 0.6075) < 1e-15);
  CHECK(std::abs(stout.torso_depth - 0.27) < 1e-15);
  CHECK(stout.arm_length == 0.55);

  HumanoidModel bad = std_m;
  bad.torso_height = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidDimensionsError);
  bad = std_m;
  bad.shoulder_width = -0.1;
  CHECK_THROWS_AS(humanoid_curves(bad, upright_pose(Vec3::Zero())),
                  InvalidDimensionsError);
}

TEST_CASE("body columns span 1.1x the torso height") {
  const HumanoidModel m = HumanoidModel::from_preset(HumanoidPreset::kStandard);
  const HumanoidCurves hc = humanoid_curves(m, upright_pose(Vec3::Zero()));

  REQUIRE(hc.center.n_points() == 11);
  REQUIRE(hc.side_r.n_points() == 11);
  REQUIRE(hc.side_l.n_points() == 11);
  REQUIRE(hc.arm_ring.n_points() == 11);
  CHECK(hc.center_lower.n_segments() == 5);
  CHECK(hc.center_upper.n_segments() == 5);

  const double span = hc.center.point(10).z() - hc.center.point(0).z();
  CHECK(std::abs(span - 1.1 * m.torso_height) < 1e-12);
  CHECK(std::abs(hc.center.point(0).z() + 0.05 * m.torso_height) < 1e-12);
  // Side columns share the vertical span, offset laterally by half the
  // shoulder width; the spine sits on the torso axis.
  for (int i = 0; i < 11; ++i) {
    CHECK(std::abs(hc.center.point(i).x()) < 1e-15);
    CHECK(std::abs(hc.center.point(i).y()) < 1e-15);
    CHECK(std::abs(hc.side_r.point(i).y() + m.shoulder_width / 2.0) < 1e-12);
    CHECK(std::abs(hc.side_l.point(i).y() - m.shoulder_width / 2.0) < 1e-12);
    CHECK(std::abs(hc.side_r.point(i).z() - hc.center.point(i).z()) < 1e-12);
    CHECK(std::abs(hc.side_l.point(i).z() - hc.center.point(i).z()) < 1e-12);
  }
}

TEST_CASE("arm ring runs elbow to elbow through both shoulders") {
  const HumanoidModel m = HumanoidModel::from_preset(HumanoidPreset::kStandard);
  const HumanoidCurves hc = humanoid_curves(m, upright_pose(Vec3::Zero()));

  // Elbows hang at 55% of the arm length, swung 0.25 rad away from the body.
  const double drop = 0.55 * m.arm_length;
  const Vec3 el_r(0.0, -m.shoulder_width / 2.0 - drop * std::sin(0.25),
                  m.torso_height - drop * std::cos(0.25));
  const Vec3 el_l(0.0, m.shoulder_width / 2.0 + drop * std::sin(0.25),
                  m.torso_height - drop * std::cos(0.25));
  CHECK((hc.arm_ring.point(0) - el_r).norm() < 1e-12);
  CHECK((hc.arm_ring.point(10) - el_l).norm() < 1e-12);

  // The shoulder keypoints sit at the torso-top corners; the resampled ring
  // rounds those corners slightly (it samples the elbow-shoulder-shoulder
  // path uniformly by arc length), staying within 2 cm of them.
  CHECK((hc.shoulder_r - Vec3(0, -0.225, 0.60)).norm() < 1e-12);
  CHECK((hc.shoulder_l - Vec3(0, 0.225, 0.60)).norm() < 1e-12);
  CHECK(point_to_polyline(hc.shoulder_r, hc.arm_ring) < 0.02);
  CHECK(point_to_polyline(hc.shoulder_l, hc.arm_ring) < 0.02);

  // Uniform arc-length resampling: every chord is at most one arc step long
  // and close to it (shorter only where it rounds a shoulder corner).
  const double path_length = 2.0 * drop + m.shoulder_width;
  const double step = path_length / 10.0;
  for (int i = 0; i < 10; ++i) {
    const auto [s0, s1] = hc.arm_ring.segment(i);
    const double chord = (s1 - s0).norm();
    CHECK(chord <= step + 1e-12);
    CHECK(chord > 0.9 * step);
  }
  CHECK(hc.arm_ring.length() <= path_length + 1e-12);
  CHECK(hc.arm_ring.length() > 0.97 * path_length);
}

TEST_CASE("posed curves are exact rigid transforms of the canonical ones") {
  const HumanoidModel m = HumanoidModel::from_preset(HumanoidPreset::kStout);
  const HumanoidCurves canon = humanoid_curves(m, upright_pose(Vec3::Zero()));

  const Vec3 pelvis(0.52, -0.31, 0.66);
  const double angle = 0.7;
  const HumanoidPose pose = tilted_pose(pelvis, angle);
  const HumanoidCurves posed = humanoid_curves(m, pose);
  const Mat3 r = rot_y(angle);

  const auto check_pair = [&](const Polyline& a, const Polyline& b) {
    REQUIRE(a.n_points() == b.n_points());
    for (int i = 0; i < a.n_points(); ++i) {
      CHECK((b.point(i) - (r * a.point(i) + pelvis)).norm() <= 1e-12);
    }
  };
  check_pair(canon.center, posed.center);
  check_pair(canon.side_r, posed.side_r);
  check_pair(canon.side_l, posed.side_l);
  check_pair(canon.arm_ring, posed.arm_ring);
  check_pair(canon.center_lower, posed.center_lower);
  check_pair(canon.side_l_upper, posed.side_l_upper);
  CHECK((posed.shoulder_r - (r * canon.shoulder_r + pelvis)).norm() <= 1e-12);

  // The horizontal pose is the specific permutation rotation: local up and
  // facing map to world +y and +z.
  const HumanoidPose horiz = horizontal_pose(Vec3::Zero());
  CHECK_NOTHROW(horiz.validate());
  const HumanoidCurves flat = humanoid_curves(m, horiz);
  for (int i = 0; i < 11; ++i) {
    const Vec3 p = canon.center.point(i);
    CHECK((flat.center.point(i) - Vec3(p.y(), p.z(), p.x())).norm() < 1e-12);
  }

  HumanoidPose bad = pose;
  bad.rotation(0, 0) = 2.0;
  CHECK_THROWS_AS(humanoid_curves(m, bad), ConfigError);
}

TEST_CASE("landmark points stack the curves in the contract order") {
  const CurveSet cs = standard_upright_set();

  const Eigen::MatrixX3d up = landmark_points(cs, Scenario::kUpright);
  REQUIRE(up.rows() == 38);
  REQUIRE(landmark_count(Scenario::kUpright) == 38);
  for (int i = 0; i < 8; ++i) {
    CHECK((up.row(i).transpose() - cs.robot.right.point(i)).norm() == 0.0);
    CHECK((up.row(8 + i).transpose() - cs.robot.left.point(i)).norm() == 0.0);
  }
  for (int i = 0; i < 11; ++i) {
    CHECK((up.row(16 + i).transpose() - cs.humanoid.center.point(i)).norm() == 0.0);
    CHECK((up.row(27 + i).transpose() - cs.humanoid.arm_ring.point(i)).norm() == 0.0);
  }

  const Eigen::MatrixX3d flat = landmark_points(cs, Scenario::kHorizontal);
  REQUIRE(flat.rows() == 49);
  REQUIRE(landmark_count(Scenario::kHorizontal) == 49);
  for (int i = 0; i < 11; ++i) {
    CHECK((flat.row(16 + i).transpose() - cs.humanoid.center.point(i)).norm() == 0.0);
    CHECK((flat.row(27 + i).transpose() - cs.humanoid.side_l.point(i)).norm() == 0.0);
    CHECK((flat.row(38 + i).transpose() - cs.humanoid.side_r.point(i)).norm() == 0.0);
  }

  CurveSet broken = cs;
  broken.humanoid.center = Polyline({Vec3(0, 0, 0), Vec3(0, 0, 1)}, "h_c");
  CHECK_THROWS_AS(landmark_points(broken, Scenario::kUpright), ShapeMismatchError);
}

TEST_CASE("shoulder heights track the pose exactly") {
  const ArmKinematicModel arm = ArmKinematicModel::builtin();
  const HumanoidModel m = HumanoidModel::from_preset(HumanoidPreset::kStandard);
  CurveSet cs;
  cs.robot = robot_curves(arm, rest_joints(arm));

  cs.humanoid = humanoid_curves(m, upright_pose(Vec3::Zero()));
  const ShoulderHeights at_origin = shoulder_heights(cs);
  CHECK(std::abs(at_origin.z_right - 0.60) < 1e-12);
  CHECK(std::abs(at_origin.z_left - 0.60) < 1e-12);

  cs.humanoid = humanoid_curves(m, upright_pose(Vec3(0.0, 0.0, 0.1)));
  const ShoulderHeights raised = shoulder_heights(cs);
  CHECK(std::abs(raised.z_right - (at_origin.z_right + 0.1)) < 1e-12);
  CHECK(std::abs(raised.z_left - (at_origin.z_left + 0.1)) < 1e-12);

  // Lying flat, both shoulders sit at the torso-axis height (the pelvis z).
  cs.humanoid = humanoid_curves(m, horizontal_pose(Vec3(0.50, -0.30, 0.60)));
  const ShoulderHeights flat = shoulder_heights(cs);
  CHECK(std::abs(flat.z_right - 0.60) < 1e-12);
  CHECK(std::abs(flat.z_left - 0.60) < 1e-12);
}

TEST_CASE("humanoid collision capsules follow the model dimensions") {
  const HumanoidModel m = HumanoidModel::from_preset(HumanoidPreset::kStandard);
  const Vec3 pelvis(0.45, 0.0, 0.35);
  const std::vector<Capsule> caps = humanoid_capsules(m, upright_pose(pelvis));
  REQUIRE(caps.size() == 2);
  CHECK((caps[0].p0 - (pelvis + Vec3(0, 0, 0.02 * 0.60))).norm() < 1e-12);
  CHECK((caps[0].p1 - (pelvis + Vec3(0, 0, 0.98 * 0.60))).norm() < 1e-12);
  CHECK(caps[0].radius == 0.12);
  CHECK((caps[1].p0 - (pelvis + Vec3(0, -0.225, 0.60))).norm() < 1e-12);
  CHECK((caps[1].p1 - (pelvis + Vec3(0, 0.225, 0.60))).norm() < 1e-12);
  CHECK(std::abs(caps[1].radius - 0.10) < 1e-15);
}

TEST_CASE("arm model file round-trips exactly") {
  const ArmKinematicModel m = ArmKinematicModel::builtin();
  const std::string path = "test_arm_model_roundtrip.json";
  save_arm_model(path, m);
  const ArmKinematicModel loaded = load_arm_model(path);
  std::remove(path.c_str());

  CHECK(loaded.schema_version == m.schema_version);
  CHECK(loaded.capsule_radius == m.capsule_radius);
  REQUIRE(loaded.joints.size() == m.joints.size());
  for (size_t k = 0; k < m.joints.size(); ++k) {
    CHECK(loaded.joints[k].name == m.joints[k].name);
    CHECK(loaded.joints[k].axis == m.joints[k].axis);
    CHECK((loaded.joints[k].offset - m.joints[k].offset).norm() == 0.0);
    CHECK(loaded.joints[k].lower == m.joints[k].lower);
    CHECK(loaded.joints[k].upper == m.joints[k].upper);
  }
  CHECK((loaded.base_pos_right - m.base_pos_right).norm() == 0.0);
  CHECK((loaded.base_pos_left - m.base_pos_left).norm() == 0.0);
  CHECK((loaded.base_rot_right - m.base_rot_right).norm() == 0.0);
  CHECK((loaded.base_rot_left - m.base_rot_left).norm() == 0.0);
  for (size_t k = 0; k < 7; ++k) {
    CHECK(loaded.rest_pose_right[k] == m.rest_pose_right[k]);
  }

  CHECK_THROWS_AS(load_arm_model("no_such_file.json"), IoError);
}

TEST_CASE("shipped arm model file matches the builtin chain") {
  const std::string path = std::string(WAMTOPO_SOURCE_DIR) + "/data/arm_model.json";
  const ArmKinematicModel shipped = load_arm_model(path);
  const ArmKinematicModel m = ArmKinematicModel::builtin();
  const RobotCurves a = robot_curves(shipped, rest_joints(shipped));
  const RobotCurves b = robot_curves(m, rest_joints(m));
  for (int k = 0; k < 8; ++k) {
    CHECK((a.right.point(k) - b.right.point(k)).norm() == 0.0);
    CHECK((a.left.point(k) - b.left.point(k)).norm() == 0.0);
  }
}
