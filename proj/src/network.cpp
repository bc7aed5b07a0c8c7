#include "wamtopo/network.hpp"

#include <cmath>
#include <utility>

#include "wamtopo/errors.hpp"
#include "wamtopo/writhe.hpp"

namespace wamtopo {

namespace {

double softplus_scalar(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_shape(const Eigen::MatrixXd& m, long rows, long cols,
                   const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeMismatchError("parameter tensor " + name + " is " +
                             std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", expected " +
                             std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

void NetWidths::validate() const {
  if (branch < 1 || merge < 1 || lstm < 1) {
    throw ConfigError("network widths must be positive");
  }
}

std::pair<int, int> input_split(InputSpace space, Scenario scenario) {
  const auto [rows, cols] = combined_writhe_shape(scenario);
  const int writhe_part = rows * cols;
  const int geometry_part = landmark_count(scenario) * 3;
  switch (space) {
    case InputSpace::kWL:
      return {writhe_part, geometry_part};
    case InputSpace::kW:
      return {writhe_part, 0};
    case InputSpace::kP:
      return {0, geometry_part};
  }
  throw ConfigError("unknown input space");
}

int NetworkParams::observation_size() const {
  const auto [n1, n2] = input_split(input_space, scenario);
  return n1 + n2;
}

NetworkParams NetworkParams::zeros(InputSpace space, Scenario scenario,
                                   NetWidths widths) {
  widths.validate();
  NetworkParams p;
  p.input_space = space;
  p.scenario = scenario;
  p.widths = widths;
  const auto [n1, n2] = input_split(space, scenario);
  auto zero = [](long rows, long cols) {
    return Eigen::MatrixXd::Zero(rows, cols);
  };
  if (p.has_branch1()) {
    p.branch1_w = zero(widths.branch, n1);
    p.branch1_b = zero(widths.branch, 1);
  }
  if (p.has_branch2()) {
    p.branch2_w = zero(widths.branch, n2);
    p.branch2_b = zero(widths.branch, 1);
  }
  const int merge_in =
      widths.branch * ((p.has_branch1() ? 1 : 0) + (p.has_branch2() ? 1 : 0));
  p.merge_w = zero(widths.merge, merge_in);
  p.merge_b = zero(widths.merge, 1);
  p.lstm_wx = zero(4 * widths.lstm, widths.merge);
  p.lstm_wh = zero(4 * widths.lstm, widths.lstm);
  p.lstm_b = zero(4 * widths.lstm, 1);
  p.value_w = zero(1, widths.lstm);
  p.value_b = zero(1, 1);
  p.mean_w = zero(kActionSize, widths.lstm);
  p.mean_b = zero(kActionSize, 1);
  p.std_w = zero(kActionSize, widths.lstm);
  p.std_b = zero(kActionSize, 1);
  return p;
}

Eigen::MatrixXd orthogonal_matrix(int rows, int cols, double gain, Rng& rng) {
  if (rows < 1 || cols < 1) {
    throw ShapeMismatchError("orthogonal_matrix: dimensions must be positive");
  }
  const int tall = std::max(rows, cols);
  const int thin = std::min(rows, cols);
  Eigen::MatrixXd draw(tall, thin);
  for (int i = 0; i < tall; ++i) {
    for (int j = 0; j < thin; ++j) {
      draw(i, j) = rng.normal();
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(draw);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(tall, thin);
  // Fix the sign ambiguity of the decomposition so the distribution follows
  // the Haar measure: flip columns where R has a negative diagonal.
  const Eigen::MatrixXd& packed = qr.matrixQR();
  for (int j = 0; j < thin; ++j) {
    if (packed(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  if (rows >= cols) {
    return gain * q;
  }
  return gain * q.transpose();
}

NetworkParams NetworkParams::orthogonal_init(InputSpace space,
                                             Scenario scenario, Rng& rng,
                                             NetWidths widths) {
  NetworkParams p = zeros(space, scenario, widths);
  const double kRelu = std::sqrt(2.0);
  if (p.has_branch1()) {
    p.branch1_w = orthogonal_matrix(static_cast<int>(p.branch1_w.rows()),
                                    static_cast<int>(p.branch1_w.cols()),
                                    kRelu, rng);
  }
  if (p.has_branch2()) {
    p.branch2_w = orthogonal_matrix(static_cast<int>(p.branch2_w.rows()),
                                    static_cast<int>(p.branch2_w.cols()),
                                    kRelu, rng);
  }
  p.merge_w = orthogonal_matrix(static_cast<int>(p.merge_w.rows()),
                                static_cast<int>(p.merge_w.cols()), kRelu, rng);
  p.lstm_wx = orthogonal_matrix(static_cast<int>(p.lstm_wx.rows()),
                                static_cast<int>(p.lstm_wx.cols()), 1.0, rng);
  p.lstm_wh = orthogonal_matrix(static_cast<int>(p.lstm_wh.rows()),
                                static_cast<int>(p.lstm_wh.cols()), 1.0, rng);
  p.value_w = orthogonal_matrix(static_cast<int>(p.value_w.rows()),
                                static_cast<int>(p.value_w.cols()), 1.0, rng);
  p.mean_w = orthogonal_matrix(static_cast<int>(p.mean_w.rows()),
                               static_cast<int>(p.mean_w.cols()), 0.01, rng);
  p.std_w = orthogonal_matrix(static_cast<int>(p.std_w.rows()),
                              static_cast<int>(p.std_w.cols()), 1.0, rng);
  return p;
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>>
NetworkParams::named() const {
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> out;
  if (has_branch1()) {
    out.emplace_back("branch1_w", &branch1_w);
    out.emplace_back("branch1_b", &branch1_b);
  }
  if (has_branch2()) {
    out.emplace_back("branch2_w", &branch2_w);
    out.emplace_back("branch2_b", &branch2_b);
  }
  out.emplace_back("merge_w", &merge_w);
  out.emplace_back("merge_b", &merge_b);
  out.emplace_back("lstm_wx", &lstm_wx);
  out.emplace_back("lstm_wh", &lstm_wh);
  out.emplace_back("lstm_b", &lstm_b);
  out.emplace_back("value_w", &value_w);
  out.emplace_back("value_b", &value_b);
  out.emplace_back("mean_w", &mean_w);
  out.emplace_back("mean_b", &mean_b);
  out.emplace_back("std_w", &std_w);
  out.emplace_back("std_b", &std_b);
  return out;
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> NetworkParams::named() {
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> out;
  for (auto& [name, tensor] :
       static_cast<const NetworkParams*>(this)->named()) {
    out.emplace_back(name, const_cast<Eigen::MatrixXd*>(tensor));
  }
  return out;
}

long NetworkParams::parameter_count() const {
  long n = 0;
  for (const auto& [name, tensor] : named()) {
    (void)name;
    n += tensor->size();
  }
  return n;
}

void NetworkParams::require_finite() const {
  for (const auto& [name, tensor] : named()) {
    if (!tensor->allFinite()) {
      throw NonFiniteParamsError("parameter tensor " + name +
                                 " contains NaN or Inf");
    }
  }
}

void NetworkParams::validate() const {
  widths.validate();
  const auto [n1, n2] = input_split(input_space, scenario);
  if (has_branch1()) {
    require_shape(branch1_w, widths.branch, n1, "branch1_w");
    require_shape(branch1_b, widths.branch, 1, "branch1_b");
  }
  if (has_branch2()) {
    require_shape(branch2_w, widths.branch, n2, "branch2_w");
    require_shape(branch2_b, widths.branch, 1, "branch2_b");
  }
  const int merge_in =
      widths.branch * ((has_branch1() ? 1 : 0) + (has_branch2() ? 1 : 0));
  require_shape(merge_w, widths.merge, merge_in, "merge_w");
  require_shape(merge_b, widths.merge, 1, "merge_b");
  require_shape(lstm_wx, 4 * widths.lstm, widths.merge, "lstm_wx");
  require_shape(lstm_wh, 4 * widths.lstm, widths.lstm, "lstm_wh");
  require_shape(lstm_b, 4 * widths.lstm, 1, "lstm_b");
  require_shape(value_w, 1, widths.lstm, "value_w");
  require_shape(value_b, 1, 1, "value_b");
  require_shape(mean_w, kActionSize, widths.lstm, "mean_w");
  require_shape(mean_b, kActionSize, 1, "mean_b");
  require_shape(std_w, kActionSize, widths.lstm, "std_w");
  require_shape(std_b, kActionSize, 1, "std_b");
}

Hidden Hidden::zeros(int width) {
  Hidden h;
  h.h = Eigen::VectorXd::Zero(width);
  h.c = Eigen::VectorXd::Zero(width);
  return h;
}

PolicyOut forward(const NetworkParams& params,
                  const Eigen::VectorXd& observation, const Hidden& hidden) {
  params.validate();
  const auto [n1, n2] = input_split(params.input_space, params.scenario);
  if (observation.size() != n1 + n2) {
    throw ShapeMismatchError(
        "observation has " + std::to_string(observation.size()) +
        " entries, network expects " + std::to_string(n1 + n2));
  }
  const int lstm = params.widths.lstm;
  if (hidden.h.size() != lstm || hidden.c.size() != lstm) {
    throw ShapeMismatchError("hidden state size does not match lstm width " +
                             std::to_string(lstm));
  }

  Eigen::VectorXd merged_in(params.merge_w.cols());
  int offset = 0;
  if (params.has_branch1()) {
    merged_in.segment(offset, params.widths.branch) =
        (params.branch1_w * observation.head(n1) + params.branch1_b.col(0))
            .cwiseMax(0.0);
    offset += params.widths.branch;
  }
  if (params.has_branch2()) {
    merged_in.segment(offset, params.widths.branch) =
        (params.branch2_w * observation.tail(n2) + params.branch2_b.col(0))
            .cwiseMax(0.0);
  }
  const Eigen::VectorXd merged =
      (params.merge_w * merged_in + params.merge_b.col(0)).cwiseMax(0.0);

  const Eigen::VectorXd gates =
      params.lstm_wx * merged + params.lstm_wh * hidden.h + params.lstm_b.col(0);
  const auto gate_i = gates.segment(0, lstm).unaryExpr(
      [](double x) { return sigmoid_scalar(x); });
  const auto gate_f = gates.segment(lstm, lstm).unaryExpr(
      [](double x) { return sigmoid_scalar(x); });
  const Eigen::VectorXd gate_g =
      gates.segment(2 * lstm, lstm).array().tanh().matrix();
  const auto gate_o = gates.segment(3 * lstm, lstm).unaryExpr(
      [](double x) { return sigmoid_scalar(x); });

  PolicyOut out;
  out.hidden.c = gate_f.cwiseProduct(hidden.c) + gate_i.cwiseProduct(gate_g);
  out.hidden.h =
      gate_o.cwiseProduct(out.hidden.c.array().tanh().matrix());
  out.value = (params.value_w * out.hidden.h)(0) + params.value_b(0, 0);
  out.mean = (params.mean_w * out.hidden.h + params.mean_b.col(0))
                 .array()
                 .tanh()
                 .matrix();
  out.stddev = (params.std_w * out.hidden.h + params.std_b.col(0))
                   .unaryExpr([](double x) { return softplus_scalar(x); });

  if (!std::isfinite(out.value) || !out.mean.allFinite() ||
      !out.stddev.allFinite() || !out.hidden.h.allFinite() ||
      !out.hidden.c.allFinite()) {
    throw NonFiniteParamsError(
        "network outputs are non-finite; parameters or observation contain "
        "NaN/Inf or have diverged");
  }
  return out;
}

}  // namespace wamtopo
