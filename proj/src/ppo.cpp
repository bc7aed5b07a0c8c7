#include "wamtopo/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

#include "wamtopo/errors.hpp"
#include "wamtopo/tape.hpp"

namespace wamtopo {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)
// Per-dimension differential entropy of a unit Gaussian: 0.5*ln(2*pi*e).
constexpr double kHalfLog2PiE = 0.5 * (kLog2Pi + 1.0);

void require_action_shapes(const Eigen::VectorXd& mean,
                           const Eigen::VectorXd& stddev) {
  if (mean.size() != stddev.size()) {
    throw ShapeMismatchError("mean and stddev sizes differ: " +
                             std::to_string(mean.size()) + " vs " +
                             std::to_string(stddev.size()));
  }
  if ((stddev.array() <= 0.0).any() || !stddev.allFinite()) {
    throw NonPositiveStdError(
        "policy standard deviation has a non-positive or non-finite entry");
  }
}

// Stored rollout data rearranged for lockstep evaluation: one column per
// episode, one entry per step.
struct Batch {
  int steps = 0;
  int episodes = 0;
  std::vector<Eigen::MatrixXd> observations;  // per step: obs_dim x episodes
  std::vector<Eigen::MatrixXd> actions;       // per step: 14 x episodes
  std::vector<Eigen::RowVectorXd> log_prob_old;  // per step: 1 x episodes
  std::vector<Eigen::RowVectorXd> advantage;
  std::vector<Eigen::RowVectorXd> returns;
};

Batch make_batch(const NetworkParams& params,
                 const std::vector<Episode>& episodes,
                 const TrainConfig& config) {
  if (episodes.empty() || episodes.front().empty()) {
    throw ShapeMismatchError("update batch must contain at least one "
                             "non-empty episode");
  }
  const int T = static_cast<int>(episodes.front().size());
  const int B = static_cast<int>(episodes.size());
  const int obs_dim = params.observation_size();
  const int act_dim = params.action_size();
  for (const Episode& ep : episodes) {
    if (static_cast<int>(ep.size()) != T) {
      throw ShapeMismatchError("episodes in one update batch must have equal "
                               "length");
    }
  }

  Batch batch;
  batch.steps = T;
  batch.episodes = B;
  batch.observations.assign(T, Eigen::MatrixXd(obs_dim, B));
  batch.actions.assign(T, Eigen::MatrixXd(act_dim, B));
  batch.log_prob_old.assign(T, Eigen::RowVectorXd(B));
  batch.advantage.assign(T, Eigen::RowVectorXd(B));
  batch.returns.assign(T, Eigen::RowVectorXd(B));

  for (int e = 0; e < B; ++e) {
    std::vector<double> rewards(episodes[e].size());
    for (size_t t = 0; t < episodes[e].size(); ++t) {
      rewards[t] = episodes[e][t].reward;
    }
    const std::vector<double> ret = compute_returns(rewards, config.discount);
    for (int t = 0; t < T; ++t) {
      const Transition& tr = episodes[e][static_cast<size_t>(t)];
      if (tr.observation.size() != obs_dim) {
        throw ShapeMismatchError("stored observation has " +
                                 std::to_string(tr.observation.size()) +
                                 " entries, network expects " +
                                 std::to_string(obs_dim));
      }
      if (tr.action.size() != act_dim) {
        throw ShapeMismatchError("stored action has " +
                                 std::to_string(tr.action.size()) +
                                 " entries, expected " +
                                 std::to_string(act_dim));
      }
      batch.observations[t].col(e) = tr.observation;
      batch.actions[t].col(e) = tr.action;
      batch.log_prob_old[t](e) = tr.log_prob;
      batch.returns[t](e) = ret[static_cast<size_t>(t)];
      batch.advantage[t](e) = ret[static_cast<size_t>(t)] - tr.value;
    }
  }
  if (config.normalize_advantages) {
    const double n = static_cast<double>(T) * B;
    if (n > 1.5) {
      double sum = 0.0;
      for (const auto& row : batch.advantage) {
        sum += row.sum();
      }
      const double mean = sum / n;
      double sq = 0.0;
      for (const auto& row : batch.advantage) {
        sq += (row.array() - mean).square().sum();
      }
      const double sd = std::sqrt(sq / (n - 1.0));
      for (auto& row : batch.advantage) {
        row = (row.array() - mean) / (sd + 1e-8);
      }
    }
  }
  return batch;
}

// Tape node ids of the parameter leaves, in NetworkParams::named() order,
// plus direct handles for building the forward pass.
struct ParamLeaves {
  std::vector<int> ordered;
  int branch1_w = -1, branch1_b = -1;
  int branch2_w = -1, branch2_b = -1;
  int merge_w = -1, merge_b = -1;
  int lstm_wx = -1, lstm_wh = -1, lstm_b = -1;
  int value_w = -1, value_b = -1;
  int mean_w = -1, mean_b = -1;
  int std_w = -1, std_b = -1;
};

ParamLeaves push_leaves(Tape& tape, const NetworkParams& params) {
  ParamLeaves ids;
  for (const auto& [name, tensor] : params.named()) {
    const int id = tape.leaf(*tensor);
    ids.ordered.push_back(id);
    if (name == "branch1_w") ids.branch1_w = id;
    else if (name == "branch1_b") ids.branch1_b = id;
    else if (name == "branch2_w") ids.branch2_w = id;
    else if (name == "branch2_b") ids.branch2_b = id;
    else if (name == "merge_w") ids.merge_w = id;
    else if (name == "merge_b") ids.merge_b = id;
    else if (name == "lstm_wx") ids.lstm_wx = id;
    else if (name == "lstm_wh") ids.lstm_wh = id;
    else if (name == "lstm_b") ids.lstm_b = id;
    else if (name == "value_w") ids.value_w = id;
    else if (name == "value_b") ids.value_b = id;
    else if (name == "mean_w") ids.mean_w = id;
    else if (name == "mean_b") ids.mean_b = id;
    else if (name == "std_w") ids.std_w = id;
    else if (name == "std_b") ids.std_b = id;
  }
  return ids;
}

struct TapedLoss {
  int loss = -1;
  ParamLeaves leaves;
  LossReport report;
};

// Builds the full clipped-surrogate loss on the tape: the whole window is
// unrolled step by step with one column per episode, starting from a zero
// LSTM carry.
TapedLoss build_loss(Tape& tape, const NetworkParams& params,
                     const Batch& batch, const TrainConfig& config) {
  TapedLoss out;
  out.leaves = push_leaves(tape, params);
  const ParamLeaves& P = out.leaves;
  const auto [n1, n2] = input_split(params.input_space, params.scenario);
  const int lstm = params.widths.lstm;
  const int B = batch.episodes;
  const double act_dim = static_cast<double>(params.action_size());

  int h = tape.constant(Eigen::MatrixXd::Zero(lstm, B));
  int c = tape.constant(Eigen::MatrixXd::Zero(lstm, B));
  int actor_sum = -1, value_sum = -1, logstd_sum = -1;

  for (int t = 0; t < batch.steps; ++t) {
    const int obs = tape.constant(batch.observations[static_cast<size_t>(t)]);
    int merged_in = -1;
    if (params.has_branch1()) {
      const int part = tape.slice_rows(obs, 0, n1);
      merged_in = tape.relu(tape.add_col_broadcast(
          tape.matmul(P.branch1_w, part), P.branch1_b));
    }
    if (params.has_branch2()) {
      const int part = tape.slice_rows(obs, n1, n2);
      const int branch = tape.relu(tape.add_col_broadcast(
          tape.matmul(P.branch2_w, part), P.branch2_b));
      merged_in = merged_in < 0 ? branch : tape.concat_rows(merged_in, branch);
    }
    const int merged = tape.relu(tape.add_col_broadcast(
        tape.matmul(P.merge_w, merged_in), P.merge_b));

    const int gates = tape.add_col_broadcast(
        tape.add(tape.matmul(P.lstm_wx, merged), tape.matmul(P.lstm_wh, h)),
        P.lstm_b);
    const int gate_i = tape.sigmoid(tape.slice_rows(gates, 0, lstm));
    const int gate_f = tape.sigmoid(tape.slice_rows(gates, lstm, lstm));
    const int gate_g = tape.tanh_of(tape.slice_rows(gates, 2 * lstm, lstm));
    const int gate_o = tape.sigmoid(tape.slice_rows(gates, 3 * lstm, lstm));
    c = tape.add(tape.mul(gate_f, c), tape.mul(gate_i, gate_g));
    h = tape.mul(gate_o, tape.tanh_of(c));

    const int value_row =
        tape.add_col_broadcast(tape.matmul(P.value_w, h), P.value_b);
    const int mean = tape.tanh_of(
        tape.add_col_broadcast(tape.matmul(P.mean_w, h), P.mean_b));
    const int stddev = tape.softplus(
        tape.add_col_broadcast(tape.matmul(P.std_w, h), P.std_b));
    const int log_std = tape.log_of(stddev);

    const int action = tape.constant(batch.actions[static_cast<size_t>(t)]);
    const int z = tape.div(tape.sub(action, mean), stddev);
    int log_prob = tape.scale(tape.colwise_sum(tape.square(z)), -0.5);
    log_prob = tape.sub(log_prob, tape.colwise_sum(log_std));
    log_prob = tape.add_const(log_prob, -0.5 * act_dim * kLog2Pi);

    const int ratio = tape.exp_of(tape.sub(
        log_prob,
        tape.constant(batch.log_prob_old[static_cast<size_t>(t)])));
    const int adv =
        tape.constant(batch.advantage[static_cast<size_t>(t)]);
    const int surrogate = tape.min_of(
        tape.mul(ratio, adv),
        tape.mul(tape.clip(ratio, 1.0 - config.clip_ratio,
                           1.0 + config.clip_ratio),
                 adv));

    const int value_err = tape.square(tape.sub(
        tape.constant(batch.returns[static_cast<size_t>(t)]), value_row));

    const int actor_t = tape.sum(surrogate);
    const int value_t = tape.sum(value_err);
    const int logstd_t = tape.sum(log_std);
    actor_sum = t == 0 ? actor_t : tape.add(actor_sum, actor_t);
    value_sum = t == 0 ? value_t : tape.add(value_sum, value_t);
    logstd_sum = t == 0 ? logstd_t : tape.add(logstd_sum, logstd_t);
  }

  const double n = static_cast<double>(batch.steps * B);
  const int actor_mean = tape.scale(actor_sum, 1.0 / n);
  const int value_mean = tape.scale(value_sum, 1.0 / n);
  // Mean per-step entropy: sum over dimensions of 0.5*ln(2*pi*e) + ln(std).
  const int entropy_mean = tape.add_const(tape.scale(logstd_sum, 1.0 / n),
                                          act_dim * kHalfLog2PiE);

  int loss = tape.scale(value_mean, config.value_coef);
  loss = tape.add(loss, tape.scale(actor_mean, -1.0));
  loss = tape.add(loss, tape.scale(entropy_mean, -config.entropy_coef));
  out.loss = loss;

  out.report.total = tape.scalar(loss);
  out.report.value_loss = tape.scalar(value_mean);
  out.report.actor_objective = tape.scalar(actor_mean);
  out.report.entropy = tape.scalar(entropy_mean);
  out.report.steps = batch.steps * B;
  return out;
}

}  // namespace

const char* to_string(UpdateMode mode) {
  switch (mode) {
    case UpdateMode::kPooledWindow: return "pooled-window";
    case UpdateMode::kPerEpisode: return "per-episode";
  }
  throw ConfigError("unknown update mode");
}

UpdateMode update_mode_from_string(const std::string& s) {
  if (s == "pooled-window") return UpdateMode::kPooledWindow;
  if (s == "per-episode") return UpdateMode::kPerEpisode;
  throw ConfigError("unknown update mode: " + s);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(discount > 0.0) || discount > 1.0) {
    throw ConfigError("discount must be in (0, 1]");
  }
  if (value_coef < 0.0) {
    throw ConfigError("value_coef must be >= 0");
  }
  if (!std::isfinite(entropy_coef)) {
    throw ConfigError("entropy_coef must be finite");
  }
  if (!(clip_ratio > 0.0)) throw ConfigError("clip_ratio must be > 0");
  if (updates_per_episode < 1) {
    throw ConfigError("updates_per_episode must be >= 1");
  }
  if (window_episodes < 1) throw ConfigError("window_episodes must be >= 1");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 ||
      adam_beta2 >= 1.0) {
    throw ConfigError("adam betas must be in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be > 0");
  widths.validate();
}

ActionSample sample_action(const Eigen::VectorXd& mean,
                           const Eigen::VectorXd& stddev, Rng& rng) {
  require_action_shapes(mean, stddev);
  ActionSample out;
  out.action.resize(mean.size());
  for (Eigen::Index d = 0; d < mean.size(); ++d) {
    out.action(d) = mean(d) + stddev(d) * rng.normal();
  }
  out.log_prob = gaussian_log_prob(out.action, mean, stddev);
  return out;
}

ActionSample greedy_action(const Eigen::VectorXd& mean,
                           const Eigen::VectorXd& stddev) {
  require_action_shapes(mean, stddev);
  ActionSample out;
  out.action = mean;
  out.log_prob = gaussian_log_prob(mean, mean, stddev);
  return out;
}

double gaussian_log_prob(const Eigen::VectorXd& action,
                         const Eigen::VectorXd& mean,
                         const Eigen::VectorXd& stddev) {
  require_action_shapes(mean, stddev);
  if (action.size() != mean.size()) {
    throw ShapeMismatchError("action and mean sizes differ");
  }
  const Eigen::ArrayXd z = (action - mean).array() / stddev.array();
  return -0.5 * static_cast<double>(mean.size()) * kLog2Pi -
         stddev.array().log().sum() - 0.5 * z.square().sum();
}

double gaussian_entropy(const Eigen::VectorXd& stddev) {
  if ((stddev.array() <= 0.0).any() || !stddev.allFinite()) {
    throw NonPositiveStdError(
        "policy standard deviation has a non-positive or non-finite entry");
  }
  return kHalfLog2PiE * static_cast<double>(stddev.size()) +
         stddev.array().log().sum();
}

std::vector<double> compute_returns(const std::vector<double>& rewards,
                                    double discount) {
  std::vector<double> returns(rewards.size());
  double acc = 0.0;
  for (size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + discount * acc;
    returns[i] = acc;
  }
  return returns;
}

AdamState AdamState::zeros_like(const NetworkParams& params) {
  AdamState state;
  for (const auto& [name, tensor] : params.named()) {
    (void)name;
    state.m.push_back(Eigen::MatrixXd::Zero(tensor->rows(), tensor->cols()));
    state.v.push_back(Eigen::MatrixXd::Zero(tensor->rows(), tensor->cols()));
  }
  return state;
}

double ppo_loss(const NetworkParams& params,
                const std::vector<Episode>& episodes,
                const TrainConfig& config) {
  config.validate();
  params.validate();
  const Batch batch = make_batch(params, episodes, config);

  double actor_sum = 0.0, value_sum = 0.0, entropy_sum = 0.0;
  for (int e = 0; e < batch.episodes; ++e) {
    Hidden carry = Hidden::zeros(params.widths.lstm);
    for (int t = 0; t < batch.steps; ++t) {
      const size_t st = static_cast<size_t>(t);
      const PolicyOut out =
          forward(params, batch.observations[st].col(e), carry);
      carry = out.hidden;
      const double log_prob_new =
          gaussian_log_prob(batch.actions[st].col(e), out.mean, out.stddev);
      const double ratio = std::exp(log_prob_new - batch.log_prob_old[st](e));
      const double clipped =
          std::clamp(ratio, 1.0 - config.clip_ratio, 1.0 + config.clip_ratio);
      const double adv = batch.advantage[st](e);
      actor_sum += std::min(ratio * adv, clipped * adv);
      const double verr = batch.returns[st](e) - out.value;
      value_sum += verr * verr;
      entropy_sum += gaussian_entropy(out.stddev);
    }
  }
  const double n = static_cast<double>(batch.steps * batch.episodes);
  return config.value_coef * (value_sum / n) - actor_sum / n -
         config.entropy_coef * (entropy_sum / n);
}

std::vector<Eigen::MatrixXd> ppo_gradients(const NetworkParams& params,
                                           const std::vector<Episode>& episodes,
                                           const TrainConfig& config,
                                           LossReport* report) {
  config.validate();
  params.validate();
  params.require_finite();
  const Batch batch = make_batch(params, episodes, config);

  Tape tape;
  const TapedLoss taped = build_loss(tape, params, batch, config);
  tape.backward(taped.loss);

  std::vector<Eigen::MatrixXd> grads;
  grads.reserve(taped.leaves.ordered.size());
  const auto named = params.named();
  for (size_t i = 0; i < taped.leaves.ordered.size(); ++i) {
    Eigen::MatrixXd g = tape.grad(taped.leaves.ordered[i]);
    if (!g.allFinite()) {
      throw NonFiniteGradientError("gradient of parameter tensor " +
                                   named[i].first + " contains NaN or Inf");
    }
    grads.push_back(std::move(g));
  }
  if (report != nullptr) {
    *report = taped.report;
  }
  return grads;
}

LossReport ppo_update(NetworkParams& params, AdamState& optimizer,
                      const std::vector<Episode>& episodes,
                      const TrainConfig& config) {
  LossReport report;
  const std::vector<Eigen::MatrixXd> grads =
      ppo_gradients(params, episodes, config, &report);

  auto named = params.named();
  if (optimizer.m.empty()) {
    optimizer = AdamState::zeros_like(params);
  }
  if (optimizer.m.size() != named.size() ||
      optimizer.v.size() != named.size()) {
    throw ShapeMismatchError(
        "optimizer state does not match the parameter tensor list");
  }

  optimizer.step += 1;
  const double bc1 =
      1.0 - std::pow(config.adam_beta1, static_cast<double>(optimizer.step));
  const double bc2 =
      1.0 - std::pow(config.adam_beta2, static_cast<double>(optimizer.step));
  for (size_t i = 0; i < named.size(); ++i) {
    Eigen::MatrixXd& theta = *named[i].second;
    const Eigen::MatrixXd& g = grads[i];
    if (optimizer.m[i].rows() != theta.rows() ||
        optimizer.m[i].cols() != theta.cols()) {
      throw ShapeMismatchError("optimizer moment shape does not match tensor " +
                               named[i].first);
    }
    optimizer.m[i] = config.adam_beta1 * optimizer.m[i] +
                     (1.0 - config.adam_beta1) * g;
    optimizer.v[i] = config.adam_beta2 * optimizer.v[i] +
                     (1.0 - config.adam_beta2) * g.cwiseProduct(g);
    const Eigen::ArrayXXd m_hat = optimizer.m[i].array() / bc1;
    const Eigen::ArrayXXd v_hat = optimizer.v[i].array() / bc2;
    theta.array() -=
        config.learning_rate * m_hat / (v_hat.sqrt() + config.adam_epsilon);
  }
  params.require_finite();
  return report;
}

double max_gradient_rel_error(const std::vector<Eigen::MatrixXd*>& tensors,
                              const std::vector<Eigen::MatrixXd>& analytic,
                              const std::function<double()>& loss, int probes,
                              double fd_step, Rng& rng) {
  if (tensors.size() != analytic.size()) {
    throw ShapeMismatchError(
        "tensor list and analytic gradient list differ in length");
  }
  if (!(fd_step > 0.0)) {
    throw ConfigError("finite-difference step must be > 0");
  }
  long total = 0;
  for (const Eigen::MatrixXd* t : tensors) total += t->size();
  if (total == 0) return 0.0;

  auto probe_at = [&](long flat) {
    long offset = flat;
    size_t k = 0;
    while (offset >= tensors[k]->size()) {
      offset -= tensors[k]->size();
      ++k;
    }
    double& entry = tensors[k]->data()[offset];
    const double saved = entry;
    entry = saved + fd_step;
    const double f_plus = loss();
    entry = saved - fd_step;
    const double f_minus = loss();
    entry = saved;
    const double fd = (f_plus - f_minus) / (2.0 * fd_step);
    const double a = analytic[k].data()[offset];
    return std::abs(a - fd) / std::max(1e-8, std::abs(a) + std::abs(fd));
  };

  double worst = 0.0;
  if (probes >= total) {
    for (long flat = 0; flat < total; ++flat) {
      worst = std::max(worst, probe_at(flat));
    }
  } else {
    for (int p = 0; p < probes; ++p) {
      const long flat = std::min<long>(
          total - 1,
          static_cast<long>(rng.uniform() * static_cast<double>(total)));
      worst = std::max(worst, probe_at(flat));
    }
  }
  return worst;
}

GradientCheckResult gradient_check(const NetworkParams& params,
                                   const std::vector<Episode>& episodes,
                                   const TrainConfig& config, int min_probes,
                                   double fd_step, Rng& rng) {
  NetworkParams working = params;
  std::vector<Eigen::MatrixXd> analytic =
      ppo_gradients(working, episodes, config);
  std::vector<Eigen::MatrixXd*> tensors;
  for (auto& [name, tensor] : working.named()) {
    (void)name;
    tensors.push_back(tensor);
  }
  // The scalar loss is evaluated through the tape-free forward pass, so the
  // check also cross-validates the two implementations against each other.
  const auto loss = [&working, &episodes, &config]() {
    return ppo_loss(working, episodes, config);
  };
  GradientCheckResult result;
  result.probes = min_probes;
  result.max_rel_error = max_gradient_rel_error(tensors, analytic, loss,
                                                min_probes, fd_step, rng);
  return result;
}

}  // namespace wamtopo
