#pragma once

#include <map>
#include <memory>
#include <vector>

#include "ontozsl/tensor.hpp"

namespace ontozsl {

using NodeId = int;

enum class Op : uint8_t {
  Const,
  Input,
  Param,
  Add,
  Sub,
  Mul,
  Div,
  AddRowVec,
  Scale,
  AddScalar,
  MatMul,
  Transpose,
  ConcatCols,
  ConcatRows,
  SliceCols,
  PadCols,
  GatherRows,
  ScatterRows,
  TakePerRow,
  ScatterPerRow,
  Sum,
  Mean,
  RowSum,
  ColSum,
  RowMaxConst,
  BroadcastCols,
  BroadcastRows,
  BroadcastFull,
  Tanh,
  Exp,
  Log,
  Sqrt,
  Square,
  LeakyRelu,
  LeakyReluMask,
};

// Reverse-mode tape over eagerly evaluated tensor ops. The backward pass
// emits ordinary nodes onto the same tape, so expressions containing
// gradients (the critic's input-gradient norm) stay differentiable.
class Graph {
 public:
  struct Node {
    Op op;
    NodeId a = -1, b = -1;
    double scalar = 0.0;       // Scale factor / AddScalar constant / leaky slope
    long i0 = 0, i1 = 0;       // slice begin / broadcast extent / target rows
    std::shared_ptr<std::vector<long>> idx;  // gather / per-row indices
    Tensor value;
  };

  // leaves
  NodeId constant(Tensor t);
  NodeId input(Tensor t);
  NodeId param(Tensor t);

  // elementwise, same shape
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId div(NodeId a, NodeId b);

  NodeId add_rowvec(NodeId a, NodeId b);  // [m,n] + [1,n]
  NodeId scale(NodeId a, double c);
  NodeId add_scalar(NodeId a, double c);
  NodeId neg(NodeId a) { return scale(a, -1.0); }

  NodeId matmul(NodeId a, NodeId b);
  NodeId transpose(NodeId a);
  NodeId concat_cols(NodeId a, NodeId b);
  NodeId concat_rows(NodeId a, NodeId b);
  NodeId slice_cols(NodeId a, long begin, long len);
  NodeId pad_cols(NodeId a, long begin, long total);
  NodeId gather_rows(NodeId a, std::vector<long> idx);
  NodeId scatter_rows(NodeId a, std::vector<long> idx, long total_rows);
  NodeId take_per_row(NodeId a, std::vector<long> idx);  // [m,n],idx[m] -> [m,1]
  NodeId scatter_per_row(NodeId a, std::vector<long> idx, long total_cols);

  // reductions / broadcasts
  NodeId sum(NodeId a);
  NodeId mean(NodeId a);
  NodeId row_sum(NodeId a);
  NodeId col_sum(NodeId a);
  NodeId row_max_const(NodeId a);  // treated as a constant in backward
  NodeId broadcast_cols(NodeId a, long n);
  NodeId broadcast_rows(NodeId a, long m);
  NodeId broadcast_full(NodeId a, long m, long n);

  // nonlinearities
  NodeId tanh_(NodeId a);
  NodeId exp_(NodeId a);
  NodeId log_(NodeId a);
  NodeId sqrt_(NodeId a);
  NodeId square(NodeId a);
  NodeId leaky_relu(NodeId a, double slope);
  NodeId leaky_relu_mask(NodeId a, double slope);
  NodeId relu(NodeId a) { return leaky_relu(a, 0.0); }

  const Tensor& value(NodeId id) const;
  size_t size() const { return nodes_.size(); }
  Op op_of(NodeId id) const { return nodes_[static_cast<size_t>(id)].op; }

  // Symbolic reverse pass from a scalar output. Returns the adjoint node per
  // requested leaf, -1 where the output does not depend on it. Each node
  // reachable from the output is visited exactly once.
  std::vector<NodeId> adjoints(NodeId output, const std::vector<NodeId>& wrt);

  // Exact reverse-mode gradients of a scalar loss for Param leaves.
  std::vector<Tensor> grad(NodeId loss, const std::vector<NodeId>& params);

  // Adjoint of an Input leaf as a graph node (zeros if unreachable).
  NodeId input_grad(NodeId output, NodeId in);
  // ||d output / d input||_2 as a differentiable scalar node.
  NodeId input_grad_norm(NodeId output, NodeId in);

 private:
  NodeId emit(Node n);
  void eval(Node& n) const;

  std::vector<Node> nodes_;
};

}  // namespace ontozsl
