#pragma once

#include <string>
#include <vector>

#include "coil/tensor.hpp"

namespace coil::ad {

// Trainable tensor with persistent gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor init)
      : name(std::move(n)), value(std::move(init)),
        grad(Tensor::zeros(value.rows, value.cols)) {}

  void zero_grad() { std::fill(grad.v.begin(), grad.v.end(), 0.0); }
};

// Reverse-mode autodiff over a linear tape of tensor ops. A tape is built
// per update step: record the forward graph, call backward(loss) once, read
// gradients out of the Parameters, clear. Nodes are appended in topological
// order so the backward sweep is a simple reverse iteration.
class Tape {
 public:
  using NodeId = int;

  // Leaves.
  NodeId constant(Tensor t);
  NodeId param(Parameter& p);

  // Binary.
  NodeId matmul(NodeId a, NodeId b, bool trans_a = false, bool trans_b = false);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId add_rowvec(NodeId a, NodeId bias);  // bias is 1 x cols, broadcast over rows

  // Unary.
  NodeId affine(NodeId a, double scale, double shift);  // scale * x + shift
  NodeId neg(NodeId a) { return affine(a, -1.0, 0.0); }
  NodeId relu(NodeId a);
  NodeId tanh(NodeId a);
  NodeId exp(NodeId a);
  NodeId log(NodeId a);
  NodeId sqrt(NodeId a);
  NodeId square(NodeId a);
  NodeId softplus(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId clamp(NodeId a, double lo, double hi);

  // Structure.
  NodeId slice_cols(NodeId a, int c0, int c1);
  NodeId concat_cols(NodeId a, NodeId b);

  // Reductions.
  NodeId sum_all(NodeId a);
  NodeId mean_all(NodeId a);
  NodeId sum_cols(NodeId a);  // rows x cols -> rows x 1

  const Tensor& value(NodeId id) const { return nodes_[id].val; }
  // Gradient of the last backward() target w.r.t. node `id` (empty if the
  // node was not on the path).
  const Tensor& grad(NodeId id) const { return nodes_[id].grad; }

  // Seeds d(loss)/d(loss) = 1 and accumulates into Parameter::grad for every
  // param leaf on the tape. `loss` must be 1x1.
  void backward(NodeId loss);

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  enum class Op {
    Const, Param, Matmul, Add, Sub, Mul, AddRowvec, Affine, Relu, Tanh, Exp,
    Log, Sqrt, Square, Softplus, Sigmoid, Clamp, SliceCols, ConcatCols,
    SumAll, MeanAll, SumCols,
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    bool ta = false;
    bool tb = false;
    double s0 = 0.0;
    double s1 = 0.0;
    int c0 = 0;
    int c1 = 0;
    Tensor val;
    Tensor grad;
    bool needs = false;
    Parameter* par = nullptr;
  };

  NodeId push(Node n);
  Tensor& grad_ref(NodeId id);
  bool needs(NodeId id) const { return id >= 0 && nodes_[id].needs; }
  void backward_node(int id);

  std::vector<Node> nodes_;
};

}  // namespace coil::ad
