#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "wamtopo/body.hpp"
#include "wamtopo/curve_set.hpp"
#include "wamtopo/delaunay.hpp"
#include "wamtopo/rng.hpp"

namespace wamtopo {

// What the policy observes each step:
//   WL: flattened combined Writhe matrix ++ flattened Laplacian deltas
//   W:  the Writhe part alone
//   P:  raw landmark coordinates, point-major (x0,y0,z0, x1,y1,z1, ...)
enum class InputSpace { kWL, kW, kP };

const char* to_string(InputSpace s);
InputSpace input_space_from_string(const std::string& s);

int observation_size(InputSpace space, Scenario scenario);

// Episode configuration. Defaults reproduce the reference setup: upright
// scenario, standard humanoid, 40 cm spawn square, 25 cm peak-to-peak
// oscillation over 16 s with 2 s control steps, 10 steps per episode.
struct EnvConfig {
  Scenario scenario = Scenario::kUpright;
  HumanoidPreset humanoid_preset = HumanoidPreset::kStandard;
  // Dimensions used only when humanoid_preset == kCustom.
  double custom_torso_height = 0.60;
  double custom_shoulder_width = 0.45;
  double custom_torso_depth = 0.20;
  double custom_arm_length = 0.55;
  double custom_neck_length = 0.10;
  std::string arm_model_file;  // empty: built-in chain

  double spawn_half_width = 0.20;          // m, per horizontal axis
  double oscillation_peak_to_peak = 0.25;  // m
  double oscillation_period_s = 16.0;      // s
  double step_period_s = 2.0;              // s per environment step
  int t_max = 10;                          // steps per episode
  double action_scale = 0.5;               // rad of joint travel per unit action
  double noise_sigma = 0.0;                // m, landmark perception noise
  InputSpace input_space = InputSpace::kWL;
  double beta1 = 5.0;                      // linking reward weight
  double beta2 = 1.0;                      // arm height punishment weight
  double gamma_ref = 1.5;                  // linking reference in the reward
  bool freeze_graph_at_reset = false;      // reuse the reset-time Delaunay graph
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
  HumanoidModel humanoid_model() const;
};

// An episode succeeds when the total linking strictly exceeds this value
// (evaluated on the true, noiseless state).
inline constexpr double kSuccessThreshold = 1.5;

// Penetration depth of the arm capsules into the humanoid capsules beyond
// which an action gets cut short.
inline constexpr double kMaxPenetration = 0.01;  // m

// Immutable per-run geometry: the robot chain and the humanoid proxy.
struct SceneModel {
  ArmKinematicModel arm;
  HumanoidModel humanoid;

  static SceneModel from_config(const EnvConfig& config);
};

// Humanoid pelvis stance the spawn square is centered on.
Vec3 nominal_pelvis(Scenario scenario);

struct EnvState {
  JointVector joints = JointVector::Zero();
  HumanoidPose pose;       // current pose, oscillation offset included
  double phase = 0.0;      // oscillation phase matching `pose`
  int t = 0;               // steps taken
  double gamma = 0.0;      // total linking of this state (previous-step
                           // value from the successor's point of view)
  bool saturated = false;  // the linking evaluation clamped some pair
};

struct Observation {
  Eigen::VectorXd values;
  bool saturated = false;  // some Writhe entry was evaluated in clamped mode
};

struct StepInfo {
  double gamma = 0.0;    // total linking after the step
  double delta = 0.0;    // change in total linking over the step
  double z_right = 0.0;  // mean right-arm height minus right shoulder (m)
  double z_left = 0.0;
  bool success = false;
  bool saturated = false;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// True (noiseless) scene curves for a state.
CurveSet scene_curves(const SceneModel& model, const EnvState& state);

// One control step, pure in (state, action): the target is the clamped
// joint move, cut back by bisection if the arm capsules would sink more
// than kMaxPenetration into the humanoid (checked against the pre-step
// pose); then the step counter advances, the humanoid oscillates, and the
// new state's total linking is evaluated. Actions are clamped to [-1,1]
// component-wise. Throws NonFiniteActionError / ShapeMismatchError.
EnvState apply_action(const EnvState& state, const Eigen::VectorXd& action,
                      const EnvConfig& config, const SceneModel& model);

// Advance the vertical bobbing by one step: the phase moves by
// 2*pi * step_period / oscillation_period and the pose's height tracks
// (peak_to_peak / 2) * sin(phase).
std::pair<HumanoidPose, double> oscillate(const HumanoidPose& pose, double phase,
                                          const EnvConfig& config);

// Build the observation. With noise_sigma > 0, every point of the six
// perceived curves is perturbed by i.i.d. N(0, sigma^2) per coordinate —
// curves in the order r_r, r_l, h_c, h_r, h_l, h_arm, points in curve
// order, coordinates x,y,z — and all derived quantities (half curves,
// Writhe, Delaunay graph, Laplacian deltas, landmark positions) are
// computed from the perturbed curves. With sigma == 0 no random draws are
// consumed. `frozen_graph`, when non-null, replaces the per-step Delaunay
// construction (WL space only).
Observation observe(const EnvState& state, const EnvConfig& config,
                    const SceneModel& model, const EdgeSet* frozen_graph,
                    Rng& rng);

struct RewardInfo {
  double reward = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double z_right = 0.0;
  double z_left = 0.0;
};

// r = beta1 * (10*delta + gamma - gamma_ref)
//     - beta2 * (max(0, z_right) + max(0, z_left))
// where delta = gamma_after - gamma_before and z_* is the mean height of
// the arm curve's points above the same-side shoulder. All terms come from
// the true states, never from noisy observations.
RewardInfo reward(const EnvState& before, const EnvState& after,
                  const EnvConfig& config, const SceneModel& model);

bool is_success(const EnvState& state);

// Owns one episodic simulation: state, RNG stream, and (optionally) the
// graph frozen at reset. Deterministic: (config, seed, actions) fixes the
// trajectory bit-for-bit on a given platform.
class Environment {
 public:
  explicit Environment(EnvConfig config);

  // Start a fresh episode. Draw order from the seeded stream: spawn dx,
  // spawn dy, oscillation phase, then any observation noise.
  std::pair<EnvState, Observation> reset(std::uint64_t seed);
  std::pair<EnvState, Observation> reset() { return reset(config_.seed); }

  StepResult step(const Eigen::VectorXd& action);

  const EnvConfig& config() const { return config_; }
  const SceneModel& model() const { return model_; }
  const EnvState& state() const;
  CurveSet curves() const;
  int observation_size() const {
    return wamtopo::observation_size(config_.input_space, config_.scenario);
  }
  bool done() const;
  // Graph captured at reset when freeze_graph_at_reset is on; empty otherwise.
  const std::optional<EdgeSet>& frozen_graph() const { return frozen_graph_; }

 private:
  EnvConfig config_;
  SceneModel model_;
  Rng rng_;
  std::optional<EnvState> state_;
  std::optional<EdgeSet> frozen_graph_;
};

}  // namespace wamtopo
