#include "coil/tape.hpp"

#include <cmath>

#include "coil/errors.hpp"
#include "coil/kernels.hpp"

namespace coil::ad {

namespace {
double stable_softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}
double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Tape::NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Tensor& Tape::grad_ref(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Tensor::zeros(n.val.rows, n.val.cols);
  return n.grad;
}

Tape::NodeId Tape::constant(Tensor t) {
  Node n;
  n.op = Op::Const;
  n.val = std::move(t);
  n.needs = false;
  return push(std::move(n));
}

Tape::NodeId Tape::param(Parameter& p) {
  Node n;
  n.op = Op::Param;
  n.val = p.value;
  n.needs = true;
  n.par = &p;
  return push(std::move(n));
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b, bool trans_a, bool trans_b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  const int m = trans_a ? A.cols : A.rows;
  const int ka = trans_a ? A.rows : A.cols;
  const int kb = trans_b ? B.cols : B.rows;
  const int nn = trans_b ? B.rows : B.cols;
  if (ka != kb) throw ShapeError("matmul: inner dimensions disagree");
  Node n;
  n.op = Op::Matmul;
  n.a = a;
  n.b = b;
  n.ta = trans_a;
  n.tb = trans_b;
  n.needs = needs(a) || needs(b);
  n.val = Tensor(m, nn);
  kernels::gemm_auto(trans_a, trans_b, m, nn, ka, A.data(), A.cols, B.data(),
                     B.cols, n.val.data(), nn, false);
  return push(std::move(n));
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (!A.same_shape(B)) throw ShapeError("add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.needs = needs(a) || needs(b);
  n.val = Tensor(A.rows, A.cols);
  kernels::map_binary_auto(kernels::Binary::Add, A.data(), B.data(),
                           n.val.data(), A.v.size());
  return push(std::move(n));
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (!A.same_shape(B)) throw ShapeError("sub: shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.a = a;
  n.b = b;
  n.needs = needs(a) || needs(b);
  n.val = Tensor(A.rows, A.cols);
  kernels::map_binary_auto(kernels::Binary::Sub, A.data(), B.data(),
                           n.val.data(), A.v.size());
  return push(std::move(n));
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (!A.same_shape(B)) throw ShapeError("mul: shape mismatch");
  Node n;
  n.op = Op::Mul;
  n.a = a;
  n.b = b;
  n.needs = needs(a) || needs(b);
  n.val = Tensor(A.rows, A.cols);
  kernels::map_binary_auto(kernels::Binary::Mul, A.data(), B.data(),
                           n.val.data(), A.v.size());
  return push(std::move(n));
}

Tape::NodeId Tape::add_rowvec(NodeId a, NodeId bias) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[bias].val;
  if (B.rows != 1 || B.cols != A.cols)
    throw ShapeError("add_rowvec: bias must be 1 x cols");
  Node n;
  n.op = Op::AddRowvec;
  n.a = a;
  n.b = bias;
  n.needs = needs(a) || needs(bias);
  n.val = A;
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) n.val.at(i, j) += B.at(0, j);
  return push(std::move(n));
}

Tape::NodeId Tape::affine(NodeId a, double scale, double shift) {
  Node n;
  n.op = Op::Affine;
  n.a = a;
  n.s0 = scale;
  n.s1 = shift;
  n.needs = needs(a);
  n.val = nodes_[a].val;
  for (double& x : n.val.v) x = scale * x + shift;
  return push(std::move(n));
}

#define COIL_UNARY(Name, OpTag, Expr)            \
  Tape::NodeId Tape::Name(NodeId a) {            \
    Node n;                                      \
    n.op = Op::OpTag;                            \
    n.a = a;                                     \
    n.needs = needs(a);                          \
    n.val = nodes_[a].val;                       \
    for (double& x : n.val.v) x = (Expr);        \
    return push(std::move(n));                   \
  }

COIL_UNARY(relu, Relu, x > 0.0 ? x : 0.0)
COIL_UNARY(tanh, Tanh, std::tanh(x))
COIL_UNARY(exp, Exp, std::exp(x))
COIL_UNARY(log, Log, std::log(x))
COIL_UNARY(sqrt, Sqrt, std::sqrt(x))
COIL_UNARY(square, Square, x * x)
COIL_UNARY(softplus, Softplus, stable_softplus(x))
COIL_UNARY(sigmoid, Sigmoid, stable_sigmoid(x))
#undef COIL_UNARY

Tape::NodeId Tape::clamp(NodeId a, double lo, double hi) {
  Node n;
  n.op = Op::Clamp;
  n.a = a;
  n.s0 = lo;
  n.s1 = hi;
  n.needs = needs(a);
  n.val = nodes_[a].val;
  for (double& x : n.val.v) x = x < lo ? lo : (x > hi ? hi : x);
  return push(std::move(n));
}

Tape::NodeId Tape::slice_cols(NodeId a, int c0, int c1) {
  const Tensor& A = nodes_[a].val;
  if (c0 < 0 || c1 > A.cols || c0 >= c1)
    throw ShapeError("slice_cols: bad column range");
  Node n;
  n.op = Op::SliceCols;
  n.a = a;
  n.c0 = c0;
  n.c1 = c1;
  n.needs = needs(a);
  n.val = Tensor(A.rows, c1 - c0);
  for (int i = 0; i < A.rows; ++i)
    for (int j = c0; j < c1; ++j) n.val.at(i, j - c0) = A.at(i, j);
  return push(std::move(n));
}

Tape::NodeId Tape::concat_cols(NodeId a, NodeId b) {
  const Tensor& A = nodes_[a].val;
  const Tensor& B = nodes_[b].val;
  if (A.rows != B.rows) throw ShapeError("concat_cols: row mismatch");
  Node n;
  n.op = Op::ConcatCols;
  n.a = a;
  n.b = b;
  n.c0 = A.cols;
  n.needs = needs(a) || needs(b);
  n.val = Tensor(A.rows, A.cols + B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < A.cols; ++j) n.val.at(i, j) = A.at(i, j);
    for (int j = 0; j < B.cols; ++j) n.val.at(i, A.cols + j) = B.at(i, j);
  }
  return push(std::move(n));
}

Tape::NodeId Tape::sum_all(NodeId a) {
  Node n;
  n.op = Op::SumAll;
  n.a = a;
  n.needs = needs(a);
  n.val = Tensor(1, 1);
  double s = 0.0;
  for (double x : nodes_[a].val.v) s += x;
  n.val.v[0] = s;
  return push(std::move(n));
}

Tape::NodeId Tape::mean_all(NodeId a) {
  const int count = nodes_[a].val.size();
  if (count == 0) throw ShapeError("mean_all: empty tensor");
  Node n;
  n.op = Op::MeanAll;
  n.a = a;
  n.needs = needs(a);
  n.val = Tensor(1, 1);
  double s = 0.0;
  for (double x : nodes_[a].val.v) s += x;
  n.val.v[0] = s / count;
  return push(std::move(n));
}

Tape::NodeId Tape::sum_cols(NodeId a) {
  const Tensor& A = nodes_[a].val;
  Node n;
  n.op = Op::SumCols;
  n.a = a;
  n.needs = needs(a);
  n.val = Tensor(A.rows, 1);
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += A.at(i, j);
    n.val.at(i, 0) = s;
  }
  return push(std::move(n));
}

void Tape::backward(NodeId loss) {
  if (loss < 0 || loss >= static_cast<NodeId>(nodes_.size()))
    throw ShapeError("backward: bad node id");
  if (nodes_[loss].val.size() != 1)
    throw ShapeError("backward: loss must be a scalar");
  grad_ref(loss).v[0] = 1.0;
  for (int id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs || n.grad.size() == 0) continue;
    backward_node(id);
  }
}

void Tape::backward_node(int id) {
  Node& n = nodes_[id];
  const Tensor& g = n.grad;
  switch (n.op) {
    case Op::Const:
      break;
    case Op::Param:
      for (size_t i = 0; i < g.v.size(); ++i) n.par->grad.v[i] += g.v[i];
      break;
    case Op::Matmul: {
      const Tensor& A = nodes_[n.a].val;
      const Tensor& B = nodes_[n.b].val;
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        if (!n.ta && !n.tb)
          kernels::gemm_auto(false, true, da.rows, da.cols, g.cols, g.data(),
                             g.cols, B.data(), B.cols, da.data(), da.cols, true);
        else if (!n.ta && n.tb)
          kernels::gemm_auto(false, false, da.rows, da.cols, g.cols, g.data(),
                             g.cols, B.data(), B.cols, da.data(), da.cols, true);
        else if (n.ta && !n.tb)
          kernels::gemm_auto(false, true, da.rows, da.cols, g.cols, B.data(),
                             B.cols, g.data(), g.cols, da.data(), da.cols, true);
        else
          kernels::gemm_auto(true, true, da.rows, da.cols, g.cols, B.data(),
                             B.cols, g.data(), g.cols, da.data(), da.cols, true);
      }
      if (needs(n.b)) {
        Tensor& db = grad_ref(n.b);
        if (!n.ta && !n.tb)
          kernels::gemm_auto(true, false, db.rows, db.cols, g.rows, A.data(),
                             A.cols, g.data(), g.cols, db.data(), db.cols, true);
        else if (!n.ta && n.tb)
          kernels::gemm_auto(true, false, db.rows, db.cols, g.rows, g.data(),
                             g.cols, A.data(), A.cols, db.data(), db.cols, true);
        else if (n.ta && !n.tb)
          kernels::gemm_auto(false, false, db.rows, db.cols, g.rows, A.data(),
                             A.cols, g.data(), g.cols, db.data(), db.cols, true);
        else
          kernels::gemm_auto(true, true, db.rows, db.cols, g.rows, g.data(),
                             g.cols, A.data(), A.cols, db.data(), db.cols, true);
      }
      break;
    }
    case Op::Add:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        for (size_t i = 0; i < g.v.size(); ++i) da.v[i] += g.v[i];
      }
      if (needs(n.b)) {
        Tensor& db = grad_ref(n.b);
        for (size_t i = 0; i < g.v.size(); ++i) db.v[i] += g.v[i];
      }
      break;
    case Op::Sub:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        for (size_t i = 0; i < g.v.size(); ++i) da.v[i] += g.v[i];
      }
      if (needs(n.b)) {
        Tensor& db = grad_ref(n.b);
        for (size_t i = 0; i < g.v.size(); ++i) db.v[i] -= g.v[i];
      }
      break;
    case Op::Mul: {
      const Tensor& A = nodes_[n.a].val;
      const Tensor& B = nodes_[n.b].val;
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        for (size_t i = 0; i < g.v.size(); ++i) da.v[i] += g.v[i] * B.v[i];
      }
      if (needs(n.b)) {
        Tensor& db = grad_ref(n.b);
        for (size_t i = 0; i < g.v.size(); ++i) db.v[i] += g.v[i] * A.v[i];
      }
      break;
    }
    case Op::AddRowvec:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        for (size_t i = 0; i < g.v.size(); ++i) da.v[i] += g.v[i];
      }
      if (needs(n.b)) {
        Tensor& db = grad_ref(n.b);
        for (int j = 0; j < g.cols; ++j) {
          double s = 0.0;
          for (int i = 0; i < g.rows; ++i) s += g.at(i, j);
          db.at(0, j) += s;
        }
      }
      break;
    case Op::Affine:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        for (size_t i = 0; i < g.v.size(); ++i) da.v[i] += n.s0 * g.v[i];
      }
      break;
    case Op::Relu:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        const Tensor& x = nodes_[n.a].val;
        for (size_t i = 0; i < g.v.size(); ++i)
          if (x.v[i] > 0.0) da.v[i] += g.v[i];
      }
      break;
    case Op::Tanh:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        for (size_t i = 0; i < g.v.size(); ++i)
          da.v[i] += g.v[i] * (1.0 - n.val.v[i] * n.val.v[i]);
      }
      break;
    case Op::Exp:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        for (size_t i = 0; i < g.v.size(); ++i) da.v[i] += g.v[i] * n.val.v[i];
      }
      break;
    case Op::Log:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        const Tensor& x = nodes_[n.a].val;
        for (size_t i = 0; i < g.v.size(); ++i) da.v[i] += g.v[i] / x.v[i];
      }
      break;
    case Op::Sqrt:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        for (size_t i = 0; i < g.v.size(); ++i)
          da.v[i] += g.v[i] * 0.5 / n.val.v[i];
      }
      break;
    case Op::Square:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        const Tensor& x = nodes_[n.a].val;
        for (size_t i = 0; i < g.v.size(); ++i)
          da.v[i] += g.v[i] * 2.0 * x.v[i];
      }
      break;
    case Op::Softplus:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        const Tensor& x = nodes_[n.a].val;
        for (size_t i = 0; i < g.v.size(); ++i)
          da.v[i] += g.v[i] * stable_sigmoid(x.v[i]);
      }
      break;
    case Op::Sigmoid:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        for (size_t i = 0; i < g.v.size(); ++i)
          da.v[i] += g.v[i] * n.val.v[i] * (1.0 - n.val.v[i]);
      }
      break;
    case Op::Clamp:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        const Tensor& x = nodes_[n.a].val;
        for (size_t i = 0; i < g.v.size(); ++i)
          if (x.v[i] > n.s0 && x.v[i] < n.s1) da.v[i] += g.v[i];
      }
      break;
    case Op::SliceCols:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        for (int i = 0; i < g.rows; ++i)
          for (int j = 0; j < g.cols; ++j) da.at(i, n.c0 + j) += g.at(i, j);
      }
      break;
    case Op::ConcatCols:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        for (int i = 0; i < g.rows; ++i)
          for (int j = 0; j < n.c0; ++j) da.at(i, j) += g.at(i, j);
      }
      if (needs(n.b)) {
        Tensor& db = grad_ref(n.b);
        for (int i = 0; i < g.rows; ++i)
          for (int j = 0; j < db.cols; ++j) db.at(i, j) += g.at(i, n.c0 + j);
      }
      break;
    case Op::SumAll:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        const double g0 = g.v[0];
        for (double& x : da.v) x += g0;
      }
      break;
    case Op::MeanAll:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        const double g0 = g.v[0] / da.v.size();
        for (double& x : da.v) x += g0;
      }
      break;
    case Op::SumCols:
      if (needs(n.a)) {
        Tensor& da = grad_ref(n.a);
        for (int i = 0; i < da.rows; ++i) {
          const double gi = g.at(i, 0);
          for (int j = 0; j < da.cols; ++j) da.at(i, j) += gi;
        }
      }
      break;
  }
}

}  // namespace coil::ad
