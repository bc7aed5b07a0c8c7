#pragma once

#include <Eigen/Dense>
#include <vector>

namespace wamtopo {

// Reverse-mode automatic differentiation over matrix-valued expressions.
//
// Values are dense matrices; a column typically carries one batch element,
// so a dense layer is matmul(weights, activations) over (features x batch)
// operands. Build the computation by calling the op methods (each returns a
// node id), finish with a 1x1 loss node, call backward(loss), and read
// d(loss)/d(leaf) via grad(leaf).
//
// Gradient tracking propagates from leaves: a node is tracked if any input
// is tracked, and backward() skips untracked subgraphs.
class Tape {
 public:
  using Mat = Eigen::MatrixXd;

  // Differentiable input (parameters).
  int leaf(Mat value);
  // Non-differentiable input (observations, targets, stored rollout data).
  int constant(Mat value);

  int matmul(int a, int b);
  int add(int a, int b);  // same shape
  int sub(int a, int b);
  int mul(int a, int b);  // elementwise
  int div(int a, int b);  // elementwise
  // a: (r x c); bias: (r x 1) broadcast across columns.
  int add_col_broadcast(int a, int bias);
  int concat_rows(int a, int b);
  int slice_rows(int a, int start, int n);
  int colwise_sum(int a);  // (r x c) -> (1 x c)

  int tanh_of(int a);
  int sigmoid(int a);
  int relu(int a);
  int softplus(int a);
  int exp_of(int a);
  int log_of(int a);
  int square(int a);
  int scale(int a, double factor);
  int add_const(int a, double constant);
  int min_of(int a, int b);               // elementwise
  int clip(int a, double lo, double hi);  // elementwise, flat outside

  int sum(int a);   // 1x1
  int mean(int a);  // 1x1

  const Mat& value(int id) const { return nodes_[static_cast<size_t>(id)].value; }
  double scalar(int id) const { return value(id)(0, 0); }

  // Seed d(loss) = 1 and sweep backwards. `loss` must be 1x1.
  void backward(int loss);
  const Mat& grad(int id) const { return nodes_[static_cast<size_t>(id)].grad; }

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  enum class Op {
    kLeaf, kConst, kMatmul, kAdd, kSub, kMul, kDiv, kAddColBroadcast,
    kConcatRows, kSliceRows, kColwiseSum, kTanh, kSigmoid, kRelu, kSoftplus,
    kExp, kLog, kSquare, kScale, kAddConst, kMin, kClip, kSum, kMean,
  };
  struct Node {
    Op op;
    int a = -1, b = -1;
    double s0 = 0.0, s1 = 0.0;  // op-specific scalars (scale, clip bounds...)
    int i0 = 0, i1 = 0;         // op-specific ints (slice bounds)
    Mat value;
    Mat grad;
    bool tracked = false;
  };

  int push(Node node);
  int unary(Op op, int a, Mat value, double s0 = 0.0, double s1 = 0.0);
  int binary(Op op, int a, int b, Mat value);
  bool tracked(int id) const { return nodes_[static_cast<size_t>(id)].tracked; }

  std::vector<Node> nodes_;
};

}  // namespace wamtopo
