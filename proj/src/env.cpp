#include "wamtopo/env.hpp"

#include <cmath>

#include "wamtopo/errors.hpp"
#include "wamtopo/laplacian.hpp"
#include "wamtopo/linking.hpp"
#include "wamtopo/writhe.hpp"

namespace wamtopo {

namespace {

constexpr double kPi = 3.14159265358979323846;

void append_row_major(const Eigen::MatrixXd& m, Eigen::VectorXd& out, int& at) {
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out[at++] = m(r, c);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

const char* to_string(InputSpace s) {
  switch (s) {
    case InputSpace::kWL: return "WL";
    case InputSpace::kW: return "W";
    case InputSpace::kP: return "P";
  }
  return "unknown";
}

InputSpace input_space_from_string(const std::string& s) {
  if (s == "WL") return InputSpace::kWL;
  if (s == "W") return InputSpace::kW;
  if (s == "P") return InputSpace::kP;
  throw ConfigError("unknown input space: " + s + " (expected WL, W or P)");
}

int observation_size(InputSpace space, Scenario scenario) {
  const auto [wr, wc] = combined_writhe_shape(scenario);
  const int writhe = wr * wc;                        // 280 upright, 210 horizontal
  const int positions = 3 * landmark_count(scenario);  // 114 upright, 147 horizontal
  switch (space) {
    case InputSpace::kWL: return writhe + positions;
    case InputSpace::kW: return writhe;
    case InputSpace::kP: return positions;
  }
  return 0;
}

void EnvConfig::validate() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  if (t_max < 1) throw ConfigError("t_max must be >= 1");
  if (!finite(spawn_half_width) || spawn_half_width < 0.0) {
    throw ConfigError("spawn_half_width must be >= 0");
  }
  if (!finite(oscillation_peak_to_peak) || oscillation_peak_to_peak < 0.0) {
    throw ConfigError("oscillation_peak_to_peak must be >= 0");
  }
  if (!finite(oscillation_period_s) || oscillation_period_s <= 0.0) {
    throw ConfigError("oscillation_period_s must be > 0");
  }
  if (!finite(step_period_s) || step_period_s <= 0.0) {
    throw ConfigError("step_period_s must be > 0");
  }
  if (!finite(action_scale) || action_scale <= 0.0) {
    throw ConfigError("action_scale must be > 0");
  }
  if (!finite(noise_sigma) || noise_sigma < 0.0) {
    throw ConfigError("noise_sigma must be >= 0");
  }
  if (!finite(beta1) || beta1 < 0.0 || !finite(beta2) || beta2 < 0.0) {
    throw ConfigError("reward weights beta1/beta2 must be >= 0");
  }
  if (!finite(gamma_ref) || gamma_ref <= 0.0) {
    throw ConfigError("gamma_ref must be > 0");
  }
  try {
    humanoid_model();
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid humanoid dimensions: ") + e.what());
  }
}

HumanoidModel EnvConfig::humanoid_model() const {
  HumanoidModel m = HumanoidModel::from_preset(humanoid_preset);
  if (humanoid_preset == HumanoidPreset::kCustom) {
    m.torso_height = custom_torso_height;
    m.shoulder_width = custom_shoulder_width;
    m.torso_depth = custom_torso_depth;
    m.arm_length = custom_arm_length;
    m.neck_length = custom_neck_length;
  }
  m.validate();
  return m;
}

SceneModel SceneModel::from_config(const EnvConfig& config) {
  config.validate();
  SceneModel m;
  m.arm = config.arm_model_file.empty() ? ArmKinematicModel::builtin()
                                        : load_arm_model(config.arm_model_file);
  m.arm.validate();
  m.humanoid = config.humanoid_model();
  return m;
}

Vec3 nominal_pelvis(Scenario scenario) {
  return scenario == Scenario::kUpright ? Vec3(0.45, 0.0, 0.35)
                                        : Vec3(0.50, -0.30, 0.60);
}

// ---------------------------------------------------------------------------
// State evolution
// ---------------------------------------------------------------------------

CurveSet scene_curves(const SceneModel& model, const EnvState& state) {
  CurveSet cs;
  cs.robot = robot_curves(model.arm, state.joints);
  cs.humanoid = humanoid_curves(model.humanoid, state.pose);
  return cs;
}

std::pair<HumanoidPose, double> oscillate(const HumanoidPose& pose, double phase,
                                          const EnvConfig& config) {
  const double amplitude = config.oscillation_peak_to_peak / 2.0;
  const double next_phase =
      phase + 2.0 * kPi * config.step_period_s / config.oscillation_period_s;
  HumanoidPose out = pose;
  out.position.z() += amplitude * (std::sin(next_phase) - std::sin(phase));
  return {out, next_phase};
}

namespace {

// Worst penetration of the arm capsules into the humanoid capsules.
double worst_penetration(const RobotCurves& rc, const std::vector<Capsule>& caps,
                         double arm_radius) {
  double worst = 0.0;
  for (const Polyline* arm : {&rc.right, &rc.left}) {
    for (int i = 0; i < arm->n_segments(); ++i) {
      const auto [s0, s1] = arm->segment(i);
      for (const Capsule& cap : caps) {
        worst = std::max(worst, capsule_segment_penetration(cap, s0, s1, arm_radius));
      }
    }
  }
  return worst;
}

}  // namespace

EnvState apply_action(const EnvState& state, const Eigen::VectorXd& action,
                      const EnvConfig& config, const SceneModel& model) {
  if (action.size() != 14) {
    throw ShapeMismatchError("action must have 14 entries, got " +
                             std::to_string(action.size()));
  }
  if (!action.allFinite()) {
    throw NonFiniteActionError("action contains non-finite entries");
  }
  const Eigen::VectorXd unit = action.cwiseMax(-1.0).cwiseMin(1.0);
  const auto [lo, hi] = joint_limits(model.arm);
  const JointVector full_step = config.action_scale * JointVector(unit);
  const auto target_at = [&](double fraction) {
    const JointVector t = state.joints + fraction * full_step;
    return JointVector(t.cwiseMax(lo).cwiseMin(hi));
  };

  // Collision guard against the pose the humanoid had while the arms moved.
  const std::vector<Capsule> caps = humanoid_capsules(model.humanoid, state.pose);
  const auto penetration = [&](const JointVector& joints) {
    return worst_penetration(robot_curves(model.arm, joints), caps,
                             model.arm.capsule_radius);
  };

  JointVector next_joints = target_at(1.0);
  if (penetration(next_joints) > kMaxPenetration) {
    if (penetration(state.joints) > kMaxPenetration) {
      // The humanoid drifted into the arms on its own; hold position.
      next_joints = state.joints;
    } else {
      double lo_f = 0.0, hi_f = 1.0;  // penetration(lo_f) <= cap < penetration(hi_f)
      for (int iter = 0; iter < 20; ++iter) {
        const double mid = 0.5 * (lo_f + hi_f);
        if (penetration(target_at(mid)) > kMaxPenetration) {
          hi_f = mid;
        } else {
          lo_f = mid;
        }
      }
      next_joints = target_at(lo_f);
    }
  }

  EnvState next = state;
  next.joints = next_joints;
  next.t = state.t + 1;
  std::tie(next.pose, next.phase) = oscillate(state.pose, state.phase, config);

  const ClampedGli g = total_linking_clamped(scene_curves(model, next),
                                             config.scenario);
  next.gamma = g.value;
  next.saturated = g.saturated;
  return next;
}

// ---------------------------------------------------------------------------
// Observation
// ---------------------------------------------------------------------------

namespace {

Polyline perturbed(const Polyline& curve, double sigma, Rng& rng) {
  std::vector<Vec3> pts = curve.points();
  for (Vec3& p : pts) {
    for (int k = 0; k < 3; ++k) p[k] += sigma * rng.normal();
  }
  return Polyline(std::move(pts), curve.id());
}

}  // namespace

Observation observe(const EnvState& state, const EnvConfig& config,
                    const SceneModel& model, const EdgeSet* frozen_graph,
                    Rng& rng) {
  CurveSet cs = scene_curves(model, state);
  if (config.noise_sigma > 0.0) {
    const double s = config.noise_sigma;
    cs.robot.right = perturbed(cs.robot.right, s, rng);
    cs.robot.left = perturbed(cs.robot.left, s, rng);
    cs.humanoid.center = perturbed(cs.humanoid.center, s, rng);
    cs.humanoid.side_r = perturbed(cs.humanoid.side_r, s, rng);
    cs.humanoid.side_l = perturbed(cs.humanoid.side_l, s, rng);
    cs.humanoid.arm_ring = perturbed(cs.humanoid.arm_ring, s, rng);
    fill_half_curves(cs.humanoid);
  }

  Observation obs;
  obs.values.resize(observation_size(config.input_space, config.scenario));
  int at = 0;

  if (config.input_space != InputSpace::kP) {
    bool saturated = false;
    const Eigen::MatrixXd writhe =
        config.scenario == Scenario::kUpright
            ? combined_writhe_upright(cs.robot, cs.humanoid, &saturated)
            : combined_writhe_horizontal(cs.robot, cs.humanoid, &saturated);
    obs.saturated = saturated;
    append_row_major(writhe, obs.values, at);
  }
  if (config.input_space != InputSpace::kW) {
    const Eigen::MatrixX3d landmarks = landmark_points(cs, config.scenario);
    if (config.input_space == InputSpace::kWL) {
      const EdgeSet graph =
          frozen_graph != nullptr ? *frozen_graph : delaunay_edges(landmarks);
      const LaplacianCoords lap = laplacian_coords(landmarks, graph);
      append_row_major(lap.deltas, obs.values, at);
    } else {
      append_row_major(landmarks, obs.values, at);
    }
  }
  return obs;
}

// ---------------------------------------------------------------------------
// Reward and success
// ---------------------------------------------------------------------------

RewardInfo reward(const EnvState& before, const EnvState& after,
                  const EnvConfig& config, const SceneModel& model) {
  const CurveSet cs = scene_curves(model, after);
  const auto arm_height = [](const Polyline& arm) {
    double sum = 0.0;
    for (const Vec3& p : arm.points()) sum += p.z();
    return sum / arm.n_points();
  };
  RewardInfo info;
  info.gamma = after.gamma;
  info.delta = after.gamma - before.gamma;
  info.z_right = arm_height(cs.robot.right) - cs.humanoid.shoulder_r.z();
  info.z_left = arm_height(cs.robot.left) - cs.humanoid.shoulder_l.z();
  info.reward =
      config.beta1 * (10.0 * info.delta + info.gamma - config.gamma_ref) -
      config.beta2 * (std::max(0.0, info.z_right) + std::max(0.0, info.z_left));
  return info;
}

bool is_success(const EnvState& state) {
  return state.gamma > kSuccessThreshold;
}

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

Environment::Environment(EnvConfig config)
    : config_(std::move(config)),
      model_(SceneModel::from_config(config_)),  // validates the config
      rng_(config_.seed) {}

std::pair<EnvState, Observation> Environment::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  EnvState s;
  s.joints = rest_joints(model_.arm);
  const double hw = config_.spawn_half_width;
  const double dx = rng_.uniform(-hw, hw);
  const double dy = rng_.uniform(-hw, hw);
  s.phase = rng_.uniform(0.0, 2.0 * kPi);

  const Vec3 pelvis = nominal_pelvis(config_.scenario) + Vec3(dx, dy, 0.0);
  HumanoidPose pose = config_.scenario == Scenario::kUpright
                          ? upright_pose(pelvis)
                          : horizontal_pose(pelvis);
  pose.position.z() +=
      (config_.oscillation_peak_to_peak / 2.0) * std::sin(s.phase);
  s.pose = pose;
  s.t = 0;

  const CurveSet cs = scene_curves(model_, s);
  const ClampedGli g = total_linking_clamped(cs, config_.scenario);
  s.gamma = g.value;
  s.saturated = g.saturated;

  frozen_graph_.reset();
  if (config_.freeze_graph_at_reset) {
    frozen_graph_ = delaunay_edges(landmark_points(cs, config_.scenario));
  }

  state_ = s;
  const EdgeSet* frozen = frozen_graph_ ? &*frozen_graph_ : nullptr;
  return {s, observe(s, config_, model_, frozen, rng_)};
}

StepResult Environment::step(const Eigen::VectorXd& action) {
  if (!state_) throw Error("step() called before reset()");
  if (state_->t >= config_.t_max) {
    throw Error("episode finished; call reset() to start a new one");
  }
  const EnvState before = *state_;
  state_ = apply_action(before, action, config_, model_);

  const EdgeSet* frozen = frozen_graph_ ? &*frozen_graph_ : nullptr;
  StepResult result;
  result.observation = observe(*state_, config_, model_, frozen, rng_);
  const RewardInfo ri = reward(before, *state_, config_, model_);
  result.reward = ri.reward;
  result.done = state_->t == config_.t_max;
  result.info.gamma = ri.gamma;
  result.info.delta = ri.delta;
  result.info.z_right = ri.z_right;
  result.info.z_left = ri.z_left;
  result.info.success = is_success(*state_);
  result.info.saturated = result.observation.saturated || state_->saturated;
  return result;
}

const EnvState& Environment::state() const {
  if (!state_) throw Error("environment has no state; call reset() first");
  return *state_;
}

CurveSet Environment::curves() const { return scene_curves(model_, state()); }

bool Environment::done() const { return state_ && state_->t >= config_.t_max; }

}  // namespace wamtopo
