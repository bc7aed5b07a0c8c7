#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "wamtopo/curve_set.hpp"
#include "wamtopo/env.hpp"
#include "wamtopo/rng.hpp"

namespace wamtopo {

// Hidden layer widths of the policy/value network.
struct NetWidths {
  int branch = 128;  // per-branch dense layer
  int merge = 128;   // dense layer after branch concatenation
  int lstm = 128;    // recurrent state size

  void validate() const;
};

// Sizes of the two observation sub-vectors fed to the input branches:
// first the topology part (flattened writhe matrix), then the geometry part
// (local coordinate deltas or raw landmark positions). A zero size means the
// corresponding branch is absent for that input space.
std::pair<int, int> input_split(InputSpace space, Scenario scenario);

// Recurrent actor-critic parameters. The observation is split per
// input_split(); each present part feeds a ReLU branch, the branch outputs
// are concatenated into a ReLU merge layer, an LSTM cell carries state
// across steps, and three linear heads read the hidden state: a scalar
// value, a tanh action mean, and a softplus action standard deviation.
//
// Biases are stored as n x 1 matrices so every parameter is one named
// dense tensor.
struct NetworkParams {
  InputSpace input_space = InputSpace::kWL;
  Scenario scenario = Scenario::kUpright;
  NetWidths widths;

  Eigen::MatrixXd branch1_w, branch1_b;  // topology branch (absent for P)
  Eigen::MatrixXd branch2_w, branch2_b;  // geometry branch (absent for W)
  Eigen::MatrixXd merge_w, merge_b;
  Eigen::MatrixXd lstm_wx, lstm_wh, lstm_b;  // gate order: input, forget, cell, output
  Eigen::MatrixXd value_w, value_b;
  Eigen::MatrixXd mean_w, mean_b;
  Eigen::MatrixXd std_w, std_b;

  bool has_branch1() const { return input_space != InputSpace::kP; }
  bool has_branch2() const { return input_space != InputSpace::kW; }
  int observation_size() const;
  int action_size() const { return kActionSize; }

  // All parameters set to zero: mean head outputs 0, std head softplus(0).
  static NetworkParams zeros(InputSpace space, Scenario scenario,
                             NetWidths widths = NetWidths{});
  // Orthogonal weight init (QR of a Gaussian draw): gain sqrt(2) for the
  // ReLU layers, 1 for the LSTM/value/std weights, 0.01 for the mean head;
  // all biases zero. Consumes rng in the order tensors are listed above.
  static NetworkParams orthogonal_init(InputSpace space, Scenario scenario,
                                       Rng& rng, NetWidths widths = NetWidths{});

  // Tensors in canonical (serialization and optimizer) order.
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> named() const;
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> named();

  long parameter_count() const;
  // Throws NonFiniteParamsError naming the first offending tensor.
  void require_finite() const;
  // Throws ShapeMismatchError if any tensor has the wrong dimensions.
  void validate() const;

  static constexpr int kActionSize = 14;
};

// Orthogonal (semi-orthogonal when rectangular) matrix scaled by `gain`.
Eigen::MatrixXd orthogonal_matrix(int rows, int cols, double gain, Rng& rng);

// LSTM carry. h is the output/hidden vector, c the cell state.
struct Hidden {
  Eigen::VectorXd h, c;

  static Hidden zeros(int width);
};

struct PolicyOut {
  double value = 0.0;
  Eigen::VectorXd mean;    // 14, in (-1, 1)
  Eigen::VectorXd stddev;  // 14, positive
  Hidden hidden;           // carry for the next step
};

// Single-step evaluation used during rollouts. Throws ShapeMismatchError on
// a wrong observation/hidden size and NonFiniteParamsError if the outputs
// come out non-finite.
PolicyOut forward(const NetworkParams& params, const Eigen::VectorXd& observation,
                  const Hidden& hidden);

}  // namespace wamtopo
