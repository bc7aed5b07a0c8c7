#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <vector>

#include "wamtopo/env.hpp"
#include "wamtopo/errors.hpp"
#include "wamtopo/laplacian.hpp"
#include "wamtopo/linking.hpp"
#include "wamtopo/writhe.hpp"
#include "test_util.hpp"

using namespace wamtopo;

namespace {

constexpr double kPi = 3.14159265358979323846;

EnvConfig fast_config() {
  EnvConfig c;
  c.input_space = InputSpace::kP;  // cheapest observation
  return c;
}

Eigen::VectorXd scripted_action(int step) {
  Eigen::VectorXd a(14);
  for (int k = 0; k < 14; ++k) a[k] = std::sin(0.37 * (14 * step + k) + 0.5);
  return a;
}

// One-sample Kolmogorov-Smirnov statistic against Uniform(lo, hi).
double ks_statistic(std::vector<double> samples, double lo, double hi) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double cdf = (samples[i] - lo) / (hi - lo);
    d = std::max(d, std::abs((i + 1) / n - cdf));
    d = std::max(d, std::abs(i / n - cdf));
  }
  return d;
}

}  // namespace

TEST_CASE("equal seeds give bitwise-identical trajectories") {
  EnvConfig c;
  c.input_space = InputSpace::kWL;
  c.noise_sigma = 0.1;
  Environment env_a(c), env_b(c);

  auto [state_a, obs_a] = env_a.reset(42);
  auto [state_b, obs_b] = env_b.reset(42);
  CHECK((state_a.joints - state_b.joints).cwiseAbs().maxCoeff() == 0.0);
  CHECK((state_a.pose.position - state_b.pose.position).norm() == 0.0);
  CHECK(state_a.phase == state_b.phase);
  CHECK(state_a.gamma == state_b.gamma);
  REQUIRE(obs_a.values.size() == obs_b.values.size());
  CHECK((obs_a.values - obs_b.values).cwiseAbs().maxCoeff() == 0.0);

  for (int t = 0; t < 10; ++t) {
    const StepResult ra = env_a.step(scripted_action(t));
    const StepResult rb = env_b.step(scripted_action(t));
    CHECK(ra.reward == rb.reward);
    CHECK(ra.info.gamma == rb.info.gamma);
    CHECK((ra.observation.values - rb.observation.values).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(ra.done == rb.done);
    CHECK(ra.done == (t == 9));
  }
  CHECK(env_a.done());
  // A different seed gives a different spawn.
  auto [state_c, obs_c] = env_b.reset(43);
  CHECK((state_c.pose.position - state_a.pose.position).norm() > 1e-6);
}

TEST_CASE("spawn offsets are uniform over the square region") {
  Environment env(fast_config());
  const Vec3 nominal = nominal_pelvis(Scenario::kUpright);
  std::vector<double> xs, ys, phases;
  std::vector<double> zs_centered;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    auto [state, obs] = env.reset(1000 + static_cast<std::uint64_t>(i));
    const Vec3 p = state.pose.position;
    xs.push_back(p.x() - nominal.x());
    ys.push_back(p.y() - nominal.y());
    phases.push_back(std::fmod(state.phase, 2.0 * kPi));
    zs_centered.push_back(p.z() - nominal.z());
    CHECK(std::abs(p.x() - nominal.x()) <= 0.20);
    CHECK(std::abs(p.y() - nominal.y()) <= 0.20);
  }
  // Critical value for alpha = 0.01 is 1.628 / sqrt(n).
  const double critical = 1.628 / std::sqrt(static_cast<double>(n));
  CHECK(ks_statistic(xs, -0.20, 0.20) < critical);
  CHECK(ks_statistic(ys, -0.20, 0.20) < critical);
  CHECK(ks_statistic(phases, 0.0, 2.0 * kPi) < critical);
  // The oscillation offset stays within the half peak-to-peak band and
  // actually uses it.
  const auto [zmin, zmax] = std::minmax_element(zs_centered.begin(), zs_centered.end());
  CHECK(*zmin >= -0.125);
  CHECK(*zmax <= 0.125);
  CHECK(*zmax - *zmin > 0.2);
}

TEST_CASE("initial linking of standard upright spawns is near 0.22") {
  Environment env(fast_config());
  double sum = 0.0;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    auto [state, obs] = env.reset(static_cast<std::uint64_t>(i));
    CHECK(state.gamma >= 0.0);
    CHECK(!is_success(state));
    sum += state.gamma;
  }
  const double mean = sum / n;
  CHECK(mean > 0.22 - 0.15);
  CHECK(mean < 0.22 + 0.15);
}

TEST_CASE("zero actions leave joints fixed while the humanoid bobs") {
  EnvConfig c = fast_config();
  Environment env(c);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(14);
  for (int seed = 0; seed < 100; ++seed) {
    auto [state0, obs0] = env.reset(static_cast<std::uint64_t>(seed));
    JointVector joints = state0.joints;
    double prev_z = state0.pose.position.z();
    double prev_phase = state0.phase;
    for (int t = 0; t < 10; ++t) {
      const StepResult r = env.step(zero);
      const EnvState& s = env.state();
      CHECK((s.joints - joints).cwiseAbs().maxCoeff() == 0.0);
      // Pose follows the documented sine track exactly.
      const double expected_dz =
          0.125 * (std::sin(s.phase) - std::sin(prev_phase));
      CHECK(std::abs((s.pose.position.z() - prev_z) - expected_dz) < 1e-15);
      prev_z = s.pose.position.z();
      prev_phase = s.phase;
      // Hug never forms by itself.
      CHECK(r.info.gamma < 0.8);
      CHECK(!r.info.success);
    }
  }
}

TEST_CASE("oscillation is periodic with 25 cm peak-to-peak travel") {
  EnvConfig c;
  c.oscillation_period_s = 16.0;
  c.step_period_s = 2.0;  // 8 steps per period
  HumanoidPose pose = upright_pose(Vec3(0.45, 0.0, 0.35));
  double phase = 0.9;
  const double z0 = pose.position.z();
  for (int k = 0; k < 8; ++k) std::tie(pose, phase) = oscillate(pose, phase, c);
  CHECK(std::abs(pose.position.z() - z0) < 1e-9);
  CHECK(std::abs(phase - (0.9 + 2.0 * kPi)) < 1e-12);

  // Sampling finely over one period sweeps the documented travel band.
  EnvConfig fine = c;
  fine.step_period_s = 0.1;  // 160 samples per period
  double zmin = z0, zmax = z0;
  for (int k = 0; k < 160; ++k) {
    std::tie(pose, phase) = oscillate(pose, phase, fine);
    zmin = std::min(zmin, pose.position.z());
    zmax = std::max(zmax, pose.position.z());
  }
  CHECK(std::abs((zmax - zmin) - 0.25) < 1e-4);

  // Zero amplitude keeps the humanoid static.
  EnvConfig still = c;
  still.oscillation_peak_to_peak = 0.0;
  auto [p2, f2] = oscillate(pose, phase, still);
  CHECK(p2.position.z() == pose.position.z());
  CHECK(f2 > phase);
}

TEST_CASE("reward follows the documented closed form") {
  const EnvConfig c;  // beta1=5, beta2=1, gamma_ref=1.5
  const SceneModel model = SceneModel::from_config(c);

  EnvState state;
  state.joints = rest_joints(model.arm);
  state.pose = upright_pose(nominal_pelvis(Scenario::kUpright));

  // With the humanoid at its nominal stance the rest arms sit below the
  // shoulders, so the punishment term vanishes.
  EnvState before = state, after = state;
  before.gamma = 1.5;
  after.gamma = 1.7;
  const RewardInfo gain = reward(before, after, c, model);
  CHECK(gain.z_right < 0.0);
  CHECK(gain.z_left < 0.0);
  CHECK(std::abs(gain.reward - 11.0) < 1e-12);

  // Zero net linking terms and arms exactly 0.1 m above both shoulders.
  const CurveSet cs = scene_curves(model, state);
  double mean_z = 0.0;
  for (const Vec3& p : cs.robot.right.points()) mean_z += p.z();
  mean_z /= cs.robot.right.n_points();
  const double shoulder_z = mean_z - 0.1;
  // Shoulders sit at pelvis z + torso height.
  EnvState low = state;
  low.pose = upright_pose(Vec3(0.45, 0.0, shoulder_z - model.humanoid.torso_height));
  low.gamma = 1.5;
  EnvState low_before = low;
  const RewardInfo pain = reward(low_before, low, c, model);
  CHECK(std::abs(pain.z_right - 0.1) < 1e-12);
  CHECK(std::abs(pain.z_left - 0.1) < 1e-12);
  CHECK(std::abs(pain.reward - (-0.2)) < 1e-12);

  // All terms zero.
  EnvState flat = state;
  flat.gamma = 1.5;
  const RewardInfo none = reward(flat, flat, c, model);
  CHECK(std::abs(none.reward - 0.0) < 1e-12);

  // Success is strict.
  EnvState s = state;
  s.gamma = 1.7;
  CHECK(is_success(s));
  s.gamma = 1.5;
  CHECK(!is_success(s));
  s.gamma = 0.2;
  CHECK(!is_success(s));
}

TEST_CASE("step info reconstructs the reward to 1e-12") {
  EnvConfig c;
  c.input_space = InputSpace::kW;
  c.noise_sigma = 0.05;
  Environment env(c);
  env.reset(7);
  for (int t = 0; t < 10; ++t) {
    const StepResult r = env.step(scripted_action(t));
    const double rebuilt =
        c.beta1 * (10.0 * r.info.delta + r.info.gamma - c.gamma_ref) -
        c.beta2 * (std::max(0.0, r.info.z_right) + std::max(0.0, r.info.z_left));
    CHECK(std::abs(r.reward - rebuilt) < 1e-12);
    CHECK(r.info.gamma >= 0.0);
  }
}

TEST_CASE("observation shapes match the input space contract") {
  CHECK(observation_size(InputSpace::kWL, Scenario::kUpright) == 394);
  CHECK(observation_size(InputSpace::kWL, Scenario::kHorizontal) == 357);
  CHECK(observation_size(InputSpace::kW, Scenario::kUpright) == 280);
  CHECK(observation_size(InputSpace::kW, Scenario::kHorizontal) == 210);
  CHECK(observation_size(InputSpace::kP, Scenario::kUpright) == 114);
  CHECK(observation_size(InputSpace::kP, Scenario::kHorizontal) == 147);

  for (const Scenario scenario : {Scenario::kUpright, Scenario::kHorizontal}) {
    for (const InputSpace space : {InputSpace::kWL, InputSpace::kW, InputSpace::kP}) {
      EnvConfig c;
      c.scenario = scenario;
      c.input_space = space;
      Environment env(c);
      auto [state, obs] = env.reset(3);
      CHECK(obs.values.size() == observation_size(space, scenario));
      CHECK(obs.values.allFinite());
      const StepResult r = env.step(scripted_action(0));
      CHECK(r.observation.values.size() == observation_size(space, scenario));
    }
  }
}

TEST_CASE("P observations are the raw landmark coordinates") {
  EnvConfig c = fast_config();
  Environment env(c);
  auto [state, obs] = env.reset(11);
  const Eigen::MatrixX3d landmarks =
      landmark_points(env.curves(), Scenario::kUpright);
  REQUIRE(obs.values.size() == 114);
  for (int i = 0; i < landmarks.rows(); ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(obs.values[3 * i + k] == landmarks(i, k));
    }
  }
}

TEST_CASE("WL observations stack writhe entries then laplacian deltas") {
  EnvConfig c;
  c.input_space = InputSpace::kWL;
  Environment env(c);
  auto [state, obs] = env.reset(5);
  REQUIRE(obs.values.size() == 394);

  const CurveSet cs = env.curves();
  bool saturated = false;
  const Eigen::MatrixXd writhe =
      combined_writhe_upright(cs.robot, cs.humanoid, &saturated);
  for (int r = 0; r < 20; ++r) {
    for (int col = 0; col < 14; ++col) {
      CHECK(obs.values[14 * r + col] == writhe(r, col));
    }
  }
  const Eigen::MatrixX3d landmarks = landmark_points(cs, Scenario::kUpright);
  const LaplacianCoords lap =
      laplacian_coords(landmarks, delaunay_edges(landmarks));
  for (int i = 0; i < 38; ++i) {
    for (int k = 0; k < 3; ++k) {
      CHECK(obs.values[280 + 3 * i + k] == lap.deltas(i, k));
    }
  }
}

TEST_CASE("perception noise perturbs observations reproducibly") {
  EnvConfig clean = fast_config();
  EnvConfig noisy = fast_config();
  noisy.noise_sigma = 0.1;

  Environment env_clean(clean), env_noisy(noisy), env_noisy2(noisy);
  auto [sc, oc] = env_clean.reset(21);
  auto [sn, on] = env_noisy.reset(21);
  auto [sn2, on2] = env_noisy2.reset(21);

  // The true state is unaffected by the observation noise.
  CHECK(sc.gamma == sn.gamma);
  CHECK((sc.pose.position - sn.pose.position).norm() == 0.0);
  // The observation is perturbed, but identically so under the same seed.
  CHECK((oc.values - on.values).cwiseAbs().maxCoeff() > 1e-4);
  CHECK((on.values - on2.values).cwiseAbs().maxCoeff() == 0.0);

  // The perturbation scale tracks sigma: coordinates move by O(sigma).
  const double rms = std::sqrt((oc.values - on.values).squaredNorm() /
                               static_cast<double>(oc.values.size()));
  CHECK(rms > 0.03);
  CHECK(rms < 0.3);

  // Heavy noise never hard-errors; saturation is reported as a flag only.
  EnvConfig heavy;
  heavy.input_space = InputSpace::kWL;
  heavy.noise_sigma = 0.3;
  Environment env_heavy(heavy);
  for (int seed = 0; seed < 30; ++seed) {
    env_heavy.reset(static_cast<std::uint64_t>(seed));
    for (int t = 0; t < 10; ++t) {
      CHECK_NOTHROW(env_heavy.step(scripted_action(t)));
    }
  }
}

TEST_CASE("frozen landmark graphs persist for the whole episode") {
  EnvConfig c;
  c.input_space = InputSpace::kWL;
  c.freeze_graph_at_reset = true;
  c.noise_sigma = 0.2;
  Environment env(c);
  env.reset(9);
  REQUIRE(env.frozen_graph().has_value());
  // The stored graph is the Delaunay graph of the true reset landmarks.
  const EdgeSet expected = delaunay_edges(
      landmark_points(env.curves(), Scenario::kUpright));
  CHECK(*env.frozen_graph() == expected);

  EnvConfig off = c;
  off.freeze_graph_at_reset = false;
  Environment env_off(off);
  env_off.reset(9);
  CHECK(!env_off.frozen_graph().has_value());

  // observe() honours the supplied graph: using a different frozen graph
  // changes the Laplacian part of the observation.
  Rng rng_a(123), rng_b(123);
  const Observation with_frozen =
      observe(env.state(), c, env.model(), &*env.frozen_graph(), rng_a);
  EdgeSet complete;
  complete.n_vertices = expected.n_vertices;
  for (int i = 0; i < complete.n_vertices; ++i) {
    for (int j = i + 1; j < complete.n_vertices; ++j) {
      complete.edges.push_back({i, j});
    }
  }
  const Observation with_complete =
      observe(env.state(), c, env.model(), &complete, rng_b);
  CHECK((with_frozen.values - with_complete.values).cwiseAbs().maxCoeff() > 1e-9);
  // The Writhe part (first 280 entries) is identical; only the Laplacian
  // tail depends on the graph.
  CHECK((with_frozen.values.head(280) - with_complete.values.head(280))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("collision guard caps capsule penetration at one centimetre") {
  EnvConfig c = fast_config();
  c.oscillation_peak_to_peak = 0.0;  // static humanoid for a clean probe
  c.spawn_half_width = 0.0;
  const SceneModel model = SceneModel::from_config(c);

  // Humanoid standing inside the right arm's yaw sweep: the straight arm
  // moves in the z = 0.72 plane, which cuts through the torso capsule while
  // staying clear of the shoulder bar (at z = 0.90 for this stance).
  EnvState state;
  state.joints = JointVector::Zero();
  state.joints[7] = 1.0;  // right shoulder yaw swung away from the body
  state.pose = upright_pose(Vec3(0.45, -0.5, 0.3));
  state.gamma = 0.0;

  const auto penetration = [&](const EnvState& s) {
    const CurveSet cs = scene_curves(model, s);
    const std::vector<Capsule> caps = humanoid_capsules(model.humanoid, s.pose);
    double worst = 0.0;
    for (const Polyline* arm : {&cs.robot.right, &cs.robot.left}) {
      for (int i = 0; i < arm->n_segments(); ++i) {
        const auto [s0, s1] = arm->segment(i);
        for (const Capsule& cap : caps) {
          worst = std::max(
              worst, capsule_segment_penetration(cap, s0, s1,
                                                 model.arm.capsule_radius));
        }
      }
    }
    return worst;
  };
  REQUIRE(penetration(state) <= kMaxPenetration);

  // Sweep the right arm toward the torso; the guard must stop it partway.
  Eigen::VectorXd sweep = Eigen::VectorXd::Zero(14);
  sweep[7] = -1.0;
  bool ever_blocked = false;
  for (int t = 0; t < 6; ++t) {
    const double target_yaw =
        std::max(state.joints[7] - c.action_scale, model.arm.joints[0].lower);
    state = apply_action(state, sweep, c, model);
    CHECK(penetration(state) <= kMaxPenetration + 1e-12);
    if (state.joints[7] > target_yaw + 1e-9) ever_blocked = true;
    // Only the commanded joint moves.
    for (int k = 0; k < 14; ++k) {
      if (k != 7) CHECK(state.joints[k] == 0.0);
    }
  }
  CHECK(ever_blocked);
  // The arm really was stopped by the body, not by its joint limit.
  CHECK(state.joints[7] > model.arm.joints[0].lower + 0.1);
}

TEST_CASE("invalid actions and call orders raise typed errors") {
  Environment env(fast_config());
  Eigen::VectorXd valid = Eigen::VectorXd::Zero(14);
  CHECK_THROWS_AS(env.step(valid), Error);  // before reset
  env.reset(1);

  Eigen::VectorXd bad = valid;
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(env.step(bad), NonFiniteActionError);
  CHECK_THROWS_AS(env.step(Eigen::VectorXd::Zero(13)), ShapeMismatchError);

  for (int t = 0; t < 10; ++t) env.step(valid);
  CHECK(env.done());
  CHECK_THROWS_AS(env.step(valid), Error);  // after the episode ended

  EnvConfig bad_config;
  bad_config.t_max = 0;
  CHECK_THROWS_AS(Environment{bad_config}, ConfigError);
  EnvConfig bad_dims;
  bad_dims.humanoid_preset = HumanoidPreset::kCustom;
  bad_dims.custom_torso_height = -1.0;
  CHECK_THROWS_AS(Environment{bad_dims}, ConfigError);
}

TEST_CASE("actions outside the unit box are clamped before scaling") {
  EnvConfig c = fast_config();
  const SceneModel model = SceneModel::from_config(c);
  EnvState state;
  state.joints = JointVector::Zero();
  state.pose = upright_pose(Vec3(2.0, 2.0, 0.0));  // far away: no collisions

  Eigen::VectorXd big = Eigen::VectorXd::Zero(14);
  big[2] = 5.0;
  big[9] = -7.0;
  const EnvState next = apply_action(state, big, c, model);
  CHECK(std::abs(next.joints[2] - c.action_scale) < 1e-15);
  CHECK(std::abs(next.joints[9] + c.action_scale) < 1e-15);

  // Pushing past a joint limit pins the joint at the limit.
  EnvState at_edge = state;
  at_edge.joints[8] = model.arm.joints[1].upper - 0.1;
  Eigen::VectorXd push = Eigen::VectorXd::Zero(14);
  push[8] = 1.0;
  const EnvState pinned = apply_action(at_edge, push, c, model);
  CHECK(pinned.joints[8] == model.arm.joints[1].upper);
}
