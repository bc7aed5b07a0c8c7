#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "wamtopo/curve_set.hpp"
#include "wamtopo/geometry.hpp"

namespace wamtopo {

// ---------------------------------------------------------------------------
// Robot arm model
// ---------------------------------------------------------------------------

// One revolute joint of the serial chain: rotation about `axis` (in the
// frame reached so far) followed by a fixed link offset expressed in the
// rotated frame.
struct ArmJoint {
  std::string name;
  char axis;    // 'x', 'y' or 'z'
  Vec3 offset;  // metres, local frame after the rotation
  double lower; // radians
  double upper;
};

// A dual-arm robot: one 7-joint chain description shared by both arms, each
// arm mounted at its own base pose. The left base mirrors the right across
// the robot's sagittal plane, so the mirrored rest pose (yaw and twist
// angles negated) produces a mirror-symmetric stance.
struct ArmKinematicModel {
  int schema_version = 1;
  std::vector<ArmJoint> joints;  // exactly 7
  Vec3 base_pos_right, base_pos_left;
  Mat3 base_rot_right, base_rot_left;
  std::array<double, 7> rest_pose_right{};  // left arm uses the mirror
  double capsule_radius = 0.04;             // arm collision capsule, metres

  // Built-in chain: alternating yaw/pitch/twist axes, ~1.0 m reach.
  static ArmKinematicModel builtin();

  void validate() const;  // throws ConfigError
  double total_reach() const;
};

// Joint angles for both arms, ordered left arm (0-6) then right arm (7-13).
using JointVector = Eigen::Matrix<double, 14, 1>;

// Mirror a single-arm pose across the sagittal plane: yaw (z) and twist (x)
// joints flip sign, pitch (y) joints keep theirs.
std::array<double, 7> mirror_arm_pose(const ArmKinematicModel& model,
                                      const std::array<double, 7>& pose);

// Rest configuration: mirrored rest pose on the left, rest pose on the right.
JointVector rest_joints(const ArmKinematicModel& model);

// Per-joint limits expanded to the 14-vector layout.
std::pair<JointVector, JointVector> joint_limits(const ArmKinematicModel& model);

// Clamp to limits (used by the action pipeline, which may not throw).
JointVector clamp_to_limits(const ArmKinematicModel& model, const JointVector& joints);

// Forward kinematics. Each arm yields 8 points: the base, then the origin
// of each link frame after its joint. Throws JointLimitError listing the
// offending indices when any angle is outside its limit interval.
RobotCurves robot_curves(const ArmKinematicModel& model, const JointVector& joints);

// Structured text round-trip for the arm model (JSON, SI units, versioned).
ArmKinematicModel load_arm_model(const std::string& path);
void save_arm_model(const std::string& path, const ArmKinematicModel& model);

// ---------------------------------------------------------------------------
// Humanoid model
// ---------------------------------------------------------------------------

enum class HumanoidPreset { kStandard, kSlim, kStout, kCustom };

const char* to_string(HumanoidPreset p);
HumanoidPreset humanoid_preset_from_string(const std::string& s);

// Rigid humanoid proxy. All dimensions in metres. The local frame has x =
// facing direction, y = left, z = up, origin at the pelvis center.
struct HumanoidModel {
  double torso_height = 0.60;
  double shoulder_width = 0.45;
  double torso_depth = 0.20;
  double arm_length = 0.55;
  double neck_length = 0.10;  // head clearance for replays; curves unaffected
  HumanoidPreset preset = HumanoidPreset::kStandard;

  // standard: 0.60 x 0.45; slim: widths x0.75; stout: torso height x0.8,
  // widths x1.35.
  static HumanoidModel from_preset(HumanoidPreset preset);

  void validate() const;  // throws InvalidDimensionsError
};

enum class Posture { kUpright, kHorizontal, kTilted };

struct HumanoidPose {
  Vec3 position = Vec3::Zero();       // pelvis center, world frame
  Mat3 rotation = Mat3::Identity();   // local->world, proper rotation
  Posture posture = Posture::kUpright;
  double tilt_angle = 0.0;            // radians, tilted posture only

  void validate() const;  // throws ConfigError if rotation is not proper
};

// Standing, back to the robot (local x = world x).
HumanoidPose upright_pose(const Vec3& pelvis);
// Lying on its back across the robot's front, body axis along world y.
HumanoidPose horizontal_pose(const Vec3& pelvis);
// Upright pose tipped by `angle` about the world y axis ("floating").
HumanoidPose tilted_pose(const Vec3& pelvis, double angle);

// Body curves in world frame: three 11-point columns (center, right, left)
// spanning 10% beyond each torso end, and the 11-point arm ring from right
// elbow over both shoulders to left elbow (elbows at 55% of arm length from
// the shoulder). Also fills half-curves and shoulder keypoints.
HumanoidCurves humanoid_curves(const HumanoidModel& model, const HumanoidPose& pose);

// Collision proxy used by the action guard: the torso axis capsule (radius
// 0.12 m) and the shoulder-to-shoulder bar (radius = torso depth / 2).
std::vector<Capsule> humanoid_capsules(const HumanoidModel& model, const HumanoidPose& pose);

// ---------------------------------------------------------------------------
// Landmarks
// ---------------------------------------------------------------------------

// Scenario landmark points, one row per point, in the contract order:
//   upright   (38): r_r 8, r_l 8, h_c 11, h_arm 11
//   horizontal(49): r_r 8, r_l 8, h_c 11, h_l 11, h_r 11
Eigen::MatrixX3d landmark_points(const CurveSet& curves, Scenario scenario);

int landmark_count(Scenario scenario);

struct ShoulderHeights {
  double z_right;
  double z_left;
};
ShoulderHeights shoulder_heights(const CurveSet& curves);

}  // namespace wamtopo
