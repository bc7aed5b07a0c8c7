#include "wamtopo/body.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wamtopo/errors.hpp"

namespace wamtopo {

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat3 rot_about(char axis, double angle) {
  switch (axis) {
    case 'x': return rot_x(angle);
    case 'y': return rot_y(angle);
    case 'z': return rot_z(angle);
    default:
      throw ConfigError("unknown joint axis '" + std::string(1, axis) +
                        "' (expected x, y or z)");
  }
}

void require_proper_rotation(const Mat3& r, const std::string& what) {
  const double ortho = (r.transpose() * r - Mat3::Identity()).norm();
  if (!r.allFinite() || ortho > 1e-9 || r.determinant() < 0.0) {
    throw ConfigError(what + " is not a proper rotation matrix");
  }
}

Polyline arm_polyline(const ArmKinematicModel& model, const Vec3& base_pos,
                      const Mat3& base_rot, const double* angles,
                      const std::string& id) {
  Mat3 r = base_rot;
  Vec3 p = base_pos;
  std::vector<Vec3> pts;
  pts.reserve(model.joints.size() + 1);
  pts.push_back(p);
  for (size_t k = 0; k < model.joints.size(); ++k) {
    const ArmJoint& joint = model.joints[k];
    r = r * rot_about(joint.axis, angles[k]);
    p = p + r * joint.offset;
    pts.push_back(p);
  }
  return Polyline(std::move(pts), id);
}

}  // namespace

// ---------------------------------------------------------------------------
// ArmKinematicModel
// ---------------------------------------------------------------------------

ArmKinematicModel ArmKinematicModel::builtin() {
  ArmKinematicModel m;
  m.schema_version = 1;
  m.joints = {
      {"shoulder_yaw", 'z', {0.08, 0.0, 0.0}, -1.7, 1.7},
      {"shoulder_pitch", 'y', {0.12, 0.0, 0.0}, -2.1, 1.0},
      {"upper_arm_twist", 'x', {0.22, 0.0, 0.0}, -3.0, 3.0},
      {"elbow_pitch", 'y', {0.10, 0.0, 0.0}, -0.05, 2.6},
      {"forearm_twist", 'x', {0.20, 0.0, 0.0}, -3.0, 3.0},
      {"wrist_pitch", 'y', {0.14, 0.0, 0.0}, -1.6, 2.1},
      {"wrist_twist", 'x', {0.14, 0.0, 0.0}, -3.0, 3.0},
  };
  m.base_pos_right = Vec3(0.06, -0.26, 0.72);
  m.base_pos_left = Vec3(0.06, 0.26, 0.72);
  m.base_rot_right = rot_z(-kPi / 4.0);
  m.base_rot_left = rot_z(kPi / 4.0);
  m.rest_pose_right = {-0.4, 0.4, 0.0, 0.2, 0.0, 0.0, 0.0};
  m.capsule_radius = 0.04;
  return m;
}

void ArmKinematicModel::validate() const {
  if (schema_version < 1) {
    throw ConfigError("arm model schema_version must be >= 1");
  }
  if (joints.size() != 7) {
    throw ConfigError("arm model must have exactly 7 joints, got " +
                      std::to_string(joints.size()));
  }
  for (size_t k = 0; k < joints.size(); ++k) {
    const ArmJoint& j = joints[k];
    const std::string where = "joint " + std::to_string(k) + " (" + j.name + ")";
    if (j.axis != 'x' && j.axis != 'y' && j.axis != 'z') {
      throw ConfigError(where + ": axis must be x, y or z");
    }
    if (!j.offset.allFinite() || j.offset.norm() < 1e-6) {
      throw ConfigError(where + ": link offset must be finite and non-zero");
    }
    if (!std::isfinite(j.lower) || !std::isfinite(j.upper) || j.lower >= j.upper) {
      throw ConfigError(where + ": limits must be finite with lower < upper");
    }
    if (rest_pose_right[k] < j.lower || rest_pose_right[k] > j.upper) {
      throw ConfigError(where + ": rest pose outside joint limits");
    }
  }
  const std::array<double, 7> rest_left = mirror_arm_pose(*this, rest_pose_right);
  for (size_t k = 0; k < joints.size(); ++k) {
    if (rest_left[k] < joints[k].lower || rest_left[k] > joints[k].upper) {
      throw ConfigError("mirrored rest pose outside limits at joint " +
                        std::to_string(k));
    }
  }
  if (!base_pos_right.allFinite() || !base_pos_left.allFinite()) {
    throw ConfigError("arm base positions must be finite");
  }
  require_proper_rotation(base_rot_right, "right arm base rotation");
  require_proper_rotation(base_rot_left, "left arm base rotation");
  if (!std::isfinite(capsule_radius) || capsule_radius <= 0.0) {
    throw ConfigError("arm capsule radius must be positive");
  }
}

double ArmKinematicModel::total_reach() const {
  double reach = 0.0;
  for (const ArmJoint& j : joints) reach += j.offset.norm();
  return reach;
}

std::array<double, 7> mirror_arm_pose(const ArmKinematicModel& model,
                                      const std::array<double, 7>& pose) {
  std::array<double, 7> out = pose;
  for (size_t k = 0; k < model.joints.size() && k < out.size(); ++k) {
    // Reflection across the sagittal plane negates rotations about the yaw
    // (z) and twist (x) axes and preserves pitch (y).
    if (model.joints[k].axis != 'y') out[k] = -out[k];
  }
  return out;
}

JointVector rest_joints(const ArmKinematicModel& model) {
  const std::array<double, 7> left = mirror_arm_pose(model, model.rest_pose_right);
  JointVector j;
  for (int k = 0; k < 7; ++k) {
    j[k] = left[static_cast<size_t>(k)];
    j[7 + k] = model.rest_pose_right[static_cast<size_t>(k)];
  }
  return j;
}

std::pair<JointVector, JointVector> joint_limits(const ArmKinematicModel& model) {
  JointVector lo, hi;
  for (int k = 0; k < 7; ++k) {
    const ArmJoint& joint = model.joints[static_cast<size_t>(k)];
    lo[k] = lo[7 + k] = joint.lower;
    hi[k] = hi[7 + k] = joint.upper;
  }
  return {lo, hi};
}

JointVector clamp_to_limits(const ArmKinematicModel& model, const JointVector& joints) {
  const auto [lo, hi] = joint_limits(model);
  return joints.cwiseMax(lo).cwiseMin(hi);
}

RobotCurves robot_curves(const ArmKinematicModel& model, const JointVector& joints) {
  const auto [lo, hi] = joint_limits(model);
  std::vector<int> bad;
  for (int k = 0; k < 14; ++k) {
    if (!std::isfinite(joints[k]) || joints[k] < lo[k] || joints[k] > hi[k]) {
      bad.push_back(k);
    }
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "joint angles outside limits at indices:";
    for (int k : bad) msg << ' ' << k;
    throw JointLimitError(msg.str());
  }
  RobotCurves rc;
  rc.left = arm_polyline(model, model.base_pos_left, model.base_rot_left,
                         joints.data(), "r_l");
  rc.right = arm_polyline(model, model.base_pos_right, model.base_rot_right,
                          joints.data() + 7, "r_r");
  return rc;
}

// ---------------------------------------------------------------------------
// Arm model file round-trip
// ---------------------------------------------------------------------------

namespace {

nlohmann::json vec3_to_json(const Vec3& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

Vec3 vec3_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(what + " must be an array of 3 numbers");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

nlohmann::json mat3_to_json(const Mat3& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    rows.push_back(nlohmann::json::array({m(r, 0), m(r, 1), m(r, 2)}));
  }
  return rows;
}

Mat3 mat3_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(what + " must be a 3x3 array");
  }
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const auto& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || row.size() != 3) {
      throw ConfigError(what + " must be a 3x3 array");
    }
    for (int c = 0; c < 3; ++c) m(r, c) = row[static_cast<size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

ArmKinematicModel load_arm_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open arm model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("arm model file " + path + " is not valid JSON: " + e.what());
  }
  try {
    ArmKinematicModel m;
    m.schema_version = j.at("schema_version").get<int>();
    m.capsule_radius = j.at("capsule_radius").get<double>();
    m.joints.clear();
    for (const auto& joint_json : j.at("joints")) {
      ArmJoint joint;
      joint.name = joint_json.at("name").get<std::string>();
      const std::string axis = joint_json.at("axis").get<std::string>();
      joint.axis = axis.size() == 1 ? axis[0] : '?';
      joint.offset = vec3_from_json(joint_json.at("offset"), "joint offset");
      const auto& limits = joint_json.at("limits");
      if (!limits.is_array() || limits.size() != 2) {
        throw ConfigError("joint limits must be an array of 2 numbers");
      }
      joint.lower = limits[0].get<double>();
      joint.upper = limits[1].get<double>();
      m.joints.push_back(joint);
    }
    m.base_pos_right = vec3_from_json(j.at("base_right").at("position"),
                                      "base_right.position");
    m.base_rot_right = mat3_from_json(j.at("base_right").at("rotation"),
                                      "base_right.rotation");
    m.base_pos_left = vec3_from_json(j.at("base_left").at("position"),
                                     "base_left.position");
    m.base_rot_left = mat3_from_json(j.at("base_left").at("rotation"),
                                     "base_left.rotation");
    const auto& rest = j.at("rest_pose_right");
    if (!rest.is_array() || rest.size() != 7) {
      throw ConfigError("rest_pose_right must be an array of 7 numbers");
    }
    for (size_t k = 0; k < 7; ++k) m.rest_pose_right[k] = rest[k].get<double>();
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("arm model file " + path + " has invalid schema: " + e.what());
  }
}

void save_arm_model(const std::string& path, const ArmKinematicModel& model) {
  model.validate();
  nlohmann::json j;
  j["schema_version"] = model.schema_version;
  j["capsule_radius"] = model.capsule_radius;
  nlohmann::json joints = nlohmann::json::array();
  for (const ArmJoint& joint : model.joints) {
    joints.push_back({{"name", joint.name},
                      {"axis", std::string(1, joint.axis)},
                      {"offset", vec3_to_json(joint.offset)},
                      {"limits", nlohmann::json::array({joint.lower, joint.upper})}});
  }
  j["joints"] = joints;
  j["base_right"] = {{"position", vec3_to_json(model.base_pos_right)},
                     {"rotation", mat3_to_json(model.base_rot_right)}};
  j["base_left"] = {{"position", vec3_to_json(model.base_pos_left)},
                    {"rotation", mat3_to_json(model.base_rot_left)}};
  j["rest_pose_right"] = model.rest_pose_right;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write arm model file: " + path);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// HumanoidModel
// ---------------------------------------------------------------------------

const char* to_string(HumanoidPreset p) {
  switch (p) {
    case HumanoidPreset::kStandard: return "standard";
    case HumanoidPreset::kSlim: return "slim";
    case HumanoidPreset::kStout: return "stout";
    case HumanoidPreset::kCustom: return "custom";
  }
  return "unknown";
}

HumanoidPreset humanoid_preset_from_string(const std::string& s) {
  if (s == "standard") return HumanoidPreset::kStandard;
  if (s == "slim") return HumanoidPreset::kSlim;
  if (s == "stout") return HumanoidPreset::kStout;
  if (s == "custom") return HumanoidPreset::kCustom;
  throw ConfigError("unknown humanoid preset: " + s);
}

HumanoidModel HumanoidModel::from_preset(HumanoidPreset preset) {
  HumanoidModel m;  // standard dimensions by default
  m.preset = preset;
  switch (preset) {
    case HumanoidPreset::kStandard:
    case HumanoidPreset::kCustom:
      break;
    case HumanoidPreset::kSlim:
      m.shoulder_width *= 0.75;
      m.torso_depth *= 0.75;
      break;
    case HumanoidPreset::kStout:
      m.torso_height *= 0.8;
      m.shoulder_width *= 1.35;
      m.torso_depth *= 1.35;
      break;
  }
  return m;
}

void HumanoidModel::validate() const {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(torso_height) || !positive(shoulder_width) ||
      !positive(torso_depth) || !positive(arm_length) || !positive(neck_length)) {
    throw InvalidDimensionsError(
        "humanoid dimensions must all be positive and finite");
  }
}

// ---------------------------------------------------------------------------
// HumanoidPose
// ---------------------------------------------------------------------------

void HumanoidPose::validate() const {
  if (!position.allFinite() || !std::isfinite(tilt_angle)) {
    throw ConfigError("humanoid pose must be finite");
  }
  require_proper_rotation(rotation, "humanoid pose rotation");
}

HumanoidPose upright_pose(const Vec3& pelvis) {
  HumanoidPose pose;
  pose.position = pelvis;
  pose.rotation = Mat3::Identity();
  pose.posture = Posture::kUpright;
  return pose;
}

HumanoidPose horizontal_pose(const Vec3& pelvis) {
  HumanoidPose pose;
  pose.position = pelvis;
  // Lying supine: the body's up axis points along world +y, its facing
  // direction along world +z, its left along world +x.
  pose.rotation.col(0) = Vec3(0, 0, 1);
  pose.rotation.col(1) = Vec3(1, 0, 0);
  pose.rotation.col(2) = Vec3(0, 1, 0);
  pose.posture = Posture::kHorizontal;
  return pose;
}

HumanoidPose tilted_pose(const Vec3& pelvis, double angle) {
  HumanoidPose pose;
  pose.position = pelvis;
  pose.rotation = rot_y(angle);
  pose.posture = Posture::kTilted;
  pose.tilt_angle = angle;
  return pose;
}

// ---------------------------------------------------------------------------
// Humanoid curves and capsules
// ---------------------------------------------------------------------------

namespace {

constexpr int kColumnPoints = 11;   // full-body curves: 11 points, 10 segments
constexpr double kColumnOverhang = 0.05;  // per-end extension, fraction of torso
constexpr double kElbowFraction = 0.55;   // elbow at 55% of arm length
constexpr double kArmHangAngle = 0.25;    // radians the upper arm swings out
constexpr double kTorsoCapsuleRadius = 0.12;

// A straight 11-point column at lateral offset `y`, spanning the torso plus
// a 5% overhang at each end so the curve is 1.1x the torso height.
std::vector<Vec3> body_column(double y, double torso_height) {
  const double lo = -kColumnOverhang * torso_height;
  const double hi = (1.0 + kColumnOverhang) * torso_height;
  std::vector<Vec3> pts;
  pts.reserve(kColumnPoints);
  for (int i = 0; i < kColumnPoints; ++i) {
    const double t = static_cast<double>(i) / (kColumnPoints - 1);
    pts.push_back(Vec3(0.0, y, lo + t * (hi - lo)));
  }
  return pts;
}

std::vector<Vec3> to_world(const std::vector<Vec3>& local, const HumanoidPose& pose) {
  std::vector<Vec3> world;
  world.reserve(local.size());
  for (const Vec3& p : local) world.push_back(pose.position + pose.rotation * p);
  return world;
}

}  // namespace

HumanoidCurves humanoid_curves(const HumanoidModel& model, const HumanoidPose& pose) {
  model.validate();
  pose.validate();

  const double th = model.torso_height;
  const double sw = model.shoulder_width;

  const Vec3 sh_r_local(0.0, -sw / 2.0, th);
  const Vec3 sh_l_local(0.0, sw / 2.0, th);
  // Upper arms hang downward, swung slightly away from the torso.
  const Vec3 hang_r = kElbowFraction * model.arm_length *
                      Vec3(0.0, -std::sin(kArmHangAngle), -std::cos(kArmHangAngle));
  const Vec3 hang_l = kElbowFraction * model.arm_length *
                      Vec3(0.0, std::sin(kArmHangAngle), -std::cos(kArmHangAngle));
  const Vec3 el_r_local = sh_r_local + hang_r;
  const Vec3 el_l_local = sh_l_local + hang_l;

  HumanoidCurves hc;
  hc.center = Polyline(to_world(body_column(0.0, th), pose), "h_c");
  hc.side_r = Polyline(to_world(body_column(-sw / 2.0, th), pose), "h_r");
  hc.side_l = Polyline(to_world(body_column(sw / 2.0, th), pose), "h_l");
  hc.arm_ring = resample_uniform(
      to_world({el_r_local, sh_r_local, sh_l_local, el_l_local}, pose),
      kColumnPoints, "h_arm");
  hc.shoulder_r = pose.position + pose.rotation * sh_r_local;
  hc.shoulder_l = pose.position + pose.rotation * sh_l_local;
  fill_half_curves(hc);
  return hc;
}

std::vector<Capsule> humanoid_capsules(const HumanoidModel& model,
                                       const HumanoidPose& pose) {
  model.validate();
  pose.validate();
  const double th = model.torso_height;
  const double sw = model.shoulder_width;
  const auto world = [&](const Vec3& p) { return pose.position + pose.rotation * p; };
  std::vector<Capsule> caps;
  caps.push_back({world(Vec3(0, 0, 0.02 * th)), world(Vec3(0, 0, 0.98 * th)),
                  kTorsoCapsuleRadius});
  caps.push_back({world(Vec3(0, -sw / 2.0, th)), world(Vec3(0, sw / 2.0, th)),
                  model.torso_depth / 2.0});
  return caps;
}

// ---------------------------------------------------------------------------
// Landmarks
// ---------------------------------------------------------------------------

int landmark_count(Scenario scenario) {
  return scenario == Scenario::kUpright ? 38 : 49;
}

Eigen::MatrixX3d landmark_points(const CurveSet& curves, Scenario scenario) {
  const auto require_points = [](const Polyline& c, int n) {
    if (c.n_points() != n) {
      throw ShapeMismatchError("curve " + c.id() + " has " +
                               std::to_string(c.n_points()) +
                               " points, expected " + std::to_string(n));
    }
  };
  require_points(curves.robot.right, 8);
  require_points(curves.robot.left, 8);
  require_points(curves.humanoid.center, 11);

  std::vector<const Polyline*> order;
  if (scenario == Scenario::kUpright) {
    require_points(curves.humanoid.arm_ring, 11);
    order = {&curves.robot.right, &curves.robot.left, &curves.humanoid.center,
             &curves.humanoid.arm_ring};
  } else {
    require_points(curves.humanoid.side_l, 11);
    require_points(curves.humanoid.side_r, 11);
    order = {&curves.robot.right, &curves.robot.left, &curves.humanoid.center,
             &curves.humanoid.side_l, &curves.humanoid.side_r};
  }

  Eigen::MatrixX3d pts(landmark_count(scenario), 3);
  int row = 0;
  for (const Polyline* c : order) {
    for (int i = 0; i < c->n_points(); ++i) {
      pts.row(row++) = c->point(i).transpose();
    }
  }
  return pts;
}

ShoulderHeights shoulder_heights(const CurveSet& curves) {
  return {curves.humanoid.shoulder_r.z(), curves.humanoid.shoulder_l.z()};
}

}  // namespace wamtopo
