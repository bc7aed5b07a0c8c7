#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "wamtopo/network.hpp"
#include "wamtopo/rng.hpp"

namespace wamtopo {

// How the optimizer consumes the replay window on each update call.
enum class UpdateMode {
  kPooledWindow,  // every update step sees all stored episodes at once
  kPerEpisode,    // each update step sees a single episode, round-robin
};

const char* to_string(UpdateMode mode);
UpdateMode update_mode_from_string(const std::string& s);

// Optimization hyper-parameters. Defaults follow the experiment setup:
// Adam with learning rate 1e-4, discount 0.99, value coefficient 0.5,
// entropy coefficient 0.01, clip ratio 0.2, four gradient steps per
// collected episode over a window of the last four episodes.
struct TrainConfig {
  double learning_rate = 1e-4;
  double discount = 0.99;
  double value_coef = 0.5;    // c1, weight of the critic loss
  double entropy_coef = 0.01; // c2, weight of the entropy bonus
  double clip_ratio = 0.2;    // epsilon, PPO ratio clip half-width
  int updates_per_episode = 4;
  int window_episodes = 4;
  UpdateMode update_mode = UpdateMode::kPooledWindow;
  // Optional online observation normalization (running mean/variance).
  // Off by default: raw topology coordinates are already well-scaled.
  bool normalize_observations = false;
  // Optional per-batch advantage standardization (mean 0, sample std 1)
  // applied inside the surrogate. The advantage estimator itself is
  // unchanged; this only rescales it, which decouples the actor step size
  // from the critic's absolute error. Off by default.
  bool normalize_advantages = false;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  NetWidths widths;
  std::uint64_t seed = 0;

  void validate() const;
};

// One environment step as stored during a rollout. `hidden` is the LSTM
// carry that was fed INTO the network at this step, so an episode can be
// re-unrolled from step 0 (whose carry is all zeros) and reproduce the
// stored Gaussian exactly.
struct Transition {
  Eigen::VectorXd observation;
  Hidden hidden;
  Eigen::VectorXd action;  // 14, as executed
  double log_prob = 0.0;   // log pi(action | observation) at collection time
  double value = 0.0;      // critic output at collection time
  double reward = 0.0;
  bool done = false;
};

using Episode = std::vector<Transition>;

struct ActionSample {
  Eigen::VectorXd action;
  double log_prob = 0.0;
};

// Diagonal-Gaussian sampling and densities. All throw NonPositiveStdError
// if any stddev entry is <= 0, and ShapeMismatchError on size mismatches.
ActionSample sample_action(const Eigen::VectorXd& mean,
                           const Eigen::VectorXd& stddev, Rng& rng);
ActionSample greedy_action(const Eigen::VectorXd& mean,
                           const Eigen::VectorXd& stddev);
double gaussian_log_prob(const Eigen::VectorXd& action,
                         const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& stddev);
// Sum over dimensions of 0.5*ln(2*pi*e) + ln(stddev_d).
double gaussian_entropy(const Eigen::VectorXd& stddev);

// Discounted Monte-Carlo returns: R_t = r_t + discount * R_{t+1}, with
// R_T = r_T (episodes are finite; no bootstrap from the critic).
std::vector<double> compute_returns(const std::vector<double>& rewards,
                                    double discount);

// Adam first/second-moment estimates, one matrix per parameter tensor in
// NetworkParams::named() order, plus the shared step counter.
struct AdamState {
  std::vector<Eigen::MatrixXd> m;
  std::vector<Eigen::MatrixXd> v;
  long step = 0;

  static AdamState zeros_like(const NetworkParams& params);
};

// Scalar summary of one loss evaluation. total = value_coef * value_loss
// - actor_objective - entropy_coef * entropy; all terms are means over
// every step of every episode in the batch.
struct LossReport {
  double total = 0.0;
  double value_loss = 0.0;       // mean squared return-minus-value error
  double actor_objective = 0.0;  // mean clipped surrogate (to maximize)
  double entropy = 0.0;          // mean per-step policy entropy
  int steps = 0;                 // transitions in the batch
};

// Clipped-surrogate loss of `params` against a batch of stored episodes,
// computed without any gradient machinery (used by rollout-time diagnostics
// and as the scalar function for finite-difference checks). Episodes are
// re-unrolled from a zero carry; advantages are returns minus the stored
// values. All episodes must have equal nonzero length.
double ppo_loss(const NetworkParams& params,
                const std::vector<Episode>& episodes,
                const TrainConfig& config);

// Reverse-mode gradient of ppo_loss with respect to every named tensor
// (same order as NetworkParams::named()). If `report` is non-null it
// receives the loss breakdown at the evaluation point.
std::vector<Eigen::MatrixXd> ppo_gradients(const NetworkParams& params,
                                           const std::vector<Episode>& episodes,
                                           const TrainConfig& config,
                                           LossReport* report = nullptr);

// One Adam step on the clipped-surrogate loss over `episodes`. Returns the
// loss breakdown at the pre-step parameters. Throws NonFiniteGradientError
// (naming the tensor) and leaves the parameters untouched if any gradient
// entry is NaN/Inf.
LossReport ppo_update(NetworkParams& params, AdamState& optimizer,
                      const std::vector<Episode>& episodes,
                      const TrainConfig& config);

// Compares analytic gradients against central finite differences of a
// scalar loss for `probes` randomly chosen parameter entries (all entries
// when the parameter count is smaller). `loss` must re-read the tensors
// through the supplied pointers. Returns the maximum relative error
// |a - b| / max(1e-8, |a| + |b|).
double max_gradient_rel_error(const std::vector<Eigen::MatrixXd*>& tensors,
                              const std::vector<Eigen::MatrixXd>& analytic,
                              const std::function<double()>& loss, int probes,
                              double fd_step, Rng& rng);

struct GradientCheckResult {
  double max_rel_error = 0.0;
  int probes = 0;
};

// Finite-difference check of ppo_gradients on a stored batch: probes at
// least `min_probes` random parameter entries with central differences of
// width `fd_step`.
GradientCheckResult gradient_check(const NetworkParams& params,
                                   const std::vector<Episode>& episodes,
                                   const TrainConfig& config, int min_probes,
                                   double fd_step, Rng& rng);

}  // namespace wamtopo
