#include "wamtopo/tape.hpp"

#include <cmath>
#include <string>

#include "wamtopo/errors.hpp"

namespace wamtopo {

namespace {

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatchError(std::string(op) + ": operands are " +
                             std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " and " +
                             std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
  }
}

// softplus(x) = log(1 + e^x), computed as max(x, 0) + log1p(e^-|x|) so large
// positive inputs do not overflow and large negative inputs underflow to 0.
double softplus_scalar(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

int Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::unary(Op op, int a, Mat value, double s0, double s1) {
  Node node;
  node.op = op;
  node.a = a;
  node.s0 = s0;
  node.s1 = s1;
  node.value = std::move(value);
  node.tracked = tracked(a);
  return push(std::move(node));
}

int Tape::binary(Op op, int a, int b, Mat value) {
  Node node;
  node.op = op;
  node.a = a;
  node.b = b;
  node.value = std::move(value);
  node.tracked = tracked(a) || tracked(b);
  return push(std::move(node));
}

int Tape::leaf(Mat value) {
  Node node;
  node.op = Op::kLeaf;
  node.value = std::move(value);
  node.tracked = true;
  return push(std::move(node));
}

int Tape::constant(Mat value) {
  Node node;
  node.op = Op::kConst;
  node.value = std::move(value);
  node.tracked = false;
  return push(std::move(node));
}

int Tape::matmul(int a, int b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  if (va.cols() != vb.rows()) {
    throw ShapeMismatchError("matmul: inner dimensions " +
                             std::to_string(va.cols()) + " and " +
                             std::to_string(vb.rows()) + " differ");
  }
  return binary(Op::kMatmul, a, b, va * vb);
}

int Tape::add(int a, int b) {
  require_same_shape(value(a), value(b), "add");
  return binary(Op::kAdd, a, b, value(a) + value(b));
}

int Tape::sub(int a, int b) {
  require_same_shape(value(a), value(b), "sub");
  return binary(Op::kSub, a, b, value(a) - value(b));
}

int Tape::mul(int a, int b) {
  require_same_shape(value(a), value(b), "mul");
  return binary(Op::kMul, a, b, value(a).cwiseProduct(value(b)));
}

int Tape::div(int a, int b) {
  require_same_shape(value(a), value(b), "div");
  return binary(Op::kDiv, a, b, value(a).cwiseQuotient(value(b)));
}

int Tape::add_col_broadcast(int a, int bias) {
  const Mat& va = value(a);
  const Mat& vb = value(bias);
  if (vb.cols() != 1 || vb.rows() != va.rows()) {
    throw ShapeMismatchError("add_col_broadcast: bias is " +
                             std::to_string(vb.rows()) + "x" +
                             std::to_string(vb.cols()) + ", operand has " +
                             std::to_string(va.rows()) + " rows");
  }
  return binary(Op::kAddColBroadcast, a, bias, va.colwise() + vb.col(0));
}

int Tape::concat_rows(int a, int b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  if (va.cols() != vb.cols()) {
    throw ShapeMismatchError("concat_rows: column counts " +
                             std::to_string(va.cols()) + " and " +
                             std::to_string(vb.cols()) + " differ");
  }
  Mat out(va.rows() + vb.rows(), va.cols());
  out.topRows(va.rows()) = va;
  out.bottomRows(vb.rows()) = vb;
  return binary(Op::kConcatRows, a, b, std::move(out));
}

int Tape::slice_rows(int a, int start, int n) {
  const Mat& va = value(a);
  if (start < 0 || n < 0 || start + n > va.rows()) {
    throw ShapeMismatchError("slice_rows: [" + std::to_string(start) + ", " +
                             std::to_string(start + n) + ") out of " +
                             std::to_string(va.rows()) + " rows");
  }
  int id = unary(Op::kSliceRows, a, va.middleRows(start, n));
  nodes_[static_cast<size_t>(id)].i0 = start;
  nodes_[static_cast<size_t>(id)].i1 = n;
  return id;
}

int Tape::colwise_sum(int a) {
  return unary(Op::kColwiseSum, a, value(a).colwise().sum());
}

int Tape::tanh_of(int a) {
  return unary(Op::kTanh, a, value(a).array().tanh().matrix());
}

int Tape::sigmoid(int a) {
  return unary(Op::kSigmoid, a,
               value(a).unaryExpr([](double x) { return sigmoid_scalar(x); }));
}

int Tape::relu(int a) {
  return unary(Op::kRelu, a, value(a).cwiseMax(0.0));
}

int Tape::softplus(int a) {
  return unary(Op::kSoftplus, a,
               value(a).unaryExpr([](double x) { return softplus_scalar(x); }));
}

int Tape::exp_of(int a) {
  return unary(Op::kExp, a, value(a).array().exp().matrix());
}

int Tape::log_of(int a) {
  return unary(Op::kLog, a, value(a).array().log().matrix());
}

int Tape::square(int a) {
  return unary(Op::kSquare, a, value(a).array().square().matrix());
}

int Tape::scale(int a, double factor) {
  return unary(Op::kScale, a, value(a) * factor, factor);
}

int Tape::add_const(int a, double constant) {
  return unary(Op::kAddConst, a, value(a).array() + constant, constant);
}

int Tape::min_of(int a, int b) {
  require_same_shape(value(a), value(b), "min_of");
  return binary(Op::kMin, a, b, value(a).cwiseMin(value(b)));
}

int Tape::clip(int a, double lo, double hi) {
  if (!(lo <= hi)) {
    throw ShapeMismatchError("clip: lower bound exceeds upper bound");
  }
  return unary(Op::kClip, a, value(a).cwiseMax(lo).cwiseMin(hi), lo, hi);
}

int Tape::sum(int a) {
  Mat out(1, 1);
  out(0, 0) = value(a).sum();
  return unary(Op::kSum, a, std::move(out));
}

int Tape::mean(int a) {
  Mat out(1, 1);
  out(0, 0) = value(a).mean();
  return unary(Op::kMean, a, std::move(out));
}

void Tape::backward(int loss) {
  if (loss < 0 || loss >= size()) {
    throw ShapeMismatchError("backward: node id out of range");
  }
  if (value(loss).rows() != 1 || value(loss).cols() != 1) {
    throw ShapeMismatchError("backward: loss node must be 1x1");
  }
  for (auto& node : nodes_) {
    if (node.tracked) {
      node.grad = Mat::Zero(node.value.rows(), node.value.cols());
    }
  }
  auto& root = nodes_[static_cast<size_t>(loss)];
  if (!root.tracked) {
    return;  // No differentiable leaf feeds the loss; all gradients are zero.
  }
  root.grad(0, 0) = 1.0;

  for (int id = loss; id >= 0; --id) {
    const Node& node = nodes_[static_cast<size_t>(id)];
    if (!node.tracked) continue;
    const Mat& g = node.grad;
    auto ga = [&]() -> Mat& { return nodes_[static_cast<size_t>(node.a)].grad; };
    auto gb = [&]() -> Mat& { return nodes_[static_cast<size_t>(node.b)].grad; };
    const bool ta = node.a >= 0 && tracked(node.a);
    const bool tb = node.b >= 0 && tracked(node.b);
    switch (node.op) {
      case Op::kLeaf:
      case Op::kConst:
        break;
      case Op::kMatmul:
        if (ta) ga() += g * value(node.b).transpose();
        if (tb) gb() += value(node.a).transpose() * g;
        break;
      case Op::kAdd:
        if (ta) ga() += g;
        if (tb) gb() += g;
        break;
      case Op::kSub:
        if (ta) ga() += g;
        if (tb) gb() -= g;
        break;
      case Op::kMul:
        if (ta) ga() += g.cwiseProduct(value(node.b));
        if (tb) gb() += g.cwiseProduct(value(node.a));
        break;
      case Op::kDiv:
        if (ta) ga() += g.cwiseQuotient(value(node.b));
        if (tb) gb() -= g.cwiseProduct(node.value).cwiseQuotient(value(node.b));
        break;
      case Op::kAddColBroadcast:
        if (ta) ga() += g;
        if (tb) gb() += g.rowwise().sum();
        break;
      case Op::kConcatRows:
        if (ta) ga() += g.topRows(value(node.a).rows());
        if (tb) gb() += g.bottomRows(value(node.b).rows());
        break;
      case Op::kSliceRows:
        if (ta) ga().middleRows(node.i0, node.i1) += g;
        break;
      case Op::kColwiseSum:
        if (ta) ga() += g.replicate(value(node.a).rows(), 1);
        break;
      case Op::kTanh:
        if (ta) {
          ga().array() += g.array() * (1.0 - node.value.array().square());
        }
        break;
      case Op::kSigmoid:
        if (ta) {
          ga().array() +=
              g.array() * node.value.array() * (1.0 - node.value.array());
        }
        break;
      case Op::kRelu:
        if (ta) {
          ga().array() +=
              g.array() * (value(node.a).array() > 0.0).cast<double>();
        }
        break;
      case Op::kSoftplus:
        // d softplus(x)/dx = sigmoid(x)
        if (ta) {
          ga().array() += g.array() * value(node.a).unaryExpr([](double x) {
            return sigmoid_scalar(x);
          }).array();
        }
        break;
      case Op::kExp:
        if (ta) ga().array() += g.array() * node.value.array();
        break;
      case Op::kLog:
        if (ta) ga().array() += g.array() / value(node.a).array();
        break;
      case Op::kSquare:
        if (ta) ga().array() += g.array() * 2.0 * value(node.a).array();
        break;
      case Op::kScale:
        if (ta) ga() += g * node.s0;
        break;
      case Op::kAddConst:
        if (ta) ga() += g;
        break;
      case Op::kMin:
        // Ties route the gradient to the first operand.
        if (ta) {
          ga().array() +=
              g.array() *
              (value(node.a).array() <= value(node.b).array()).cast<double>();
        }
        if (tb) {
          gb().array() +=
              g.array() *
              (value(node.a).array() > value(node.b).array()).cast<double>();
        }
        break;
      case Op::kClip:
        // Flat (zero gradient) at and beyond the bounds.
        if (ta) {
          ga().array() += g.array() *
                          ((value(node.a).array() > node.s0) &&
                           (value(node.a).array() < node.s1))
                              .cast<double>();
        }
        break;
      case Op::kSum:
        if (ta) {
          ga().array() += g(0, 0);
        }
        break;
      case Op::kMean:
        if (ta) {
          ga().array() += g(0, 0) / static_cast<double>(value(node.a).size());
        }
        break;
    }
  }
}

}  // namespace wamtopo
