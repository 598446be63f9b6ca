#pragma once

#include <cmath>
#include <vector>

#include "ontozsl/graph.hpp"
#include "ontozsl/rng.hpp"

namespace ontozsl {

// Fully connected layer, y = x W + b with W stored [in, out].
struct Linear {
  Tensor W, b;

  long in_dim() const { return W.rows(); }
  long out_dim() const { return W.cols(); }
};

// TransE-style uniform init, bound 6/sqrt(fan_in)
inline Linear make_linear(Rng& rng, long in, long out) {
  double bound = 6.0 / std::sqrt(static_cast<double>(in));
  return Linear{rng.uniform_tensor(in, out, -bound, bound), Tensor(1, out, 0.0)};
}

// Tracks the (tensor, node) pairing for one optimization step.
struct ParamSet {
  std::vector<Tensor*> tensors;
  std::vector<NodeId> nodes;

  NodeId declare(Graph& g, Tensor& t) {
    NodeId id = g.param(t);
    tensors.push_back(&t);
    nodes.push_back(id);
    return id;
  }
};

struct LinearNodes {
  NodeId W, b;
};

inline LinearNodes declare_linear(Graph& g, Linear& layer, ParamSet& ps) {
  return {ps.declare(g, layer.W), ps.declare(g, layer.b)};
}

inline LinearNodes freeze_linear(Graph& g, const Linear& layer) {
  return {g.constant(layer.W), g.constant(layer.b)};
}

inline NodeId apply_linear(Graph& g, const LinearNodes& l, NodeId x) {
  return g.add_rowvec(g.matmul(x, l.W), l.b);
}

// mean over rows of the L2 norm of each row
inline NodeId mean_row_norm(Graph& g, NodeId x) {
  return g.mean(g.sqrt_(g.row_sum(g.square(x))));
}

// Row-wise numerically stable log-sum-exp, [m,n] -> [m,1]. The max shift is
// held constant in backward, which leaves the gradient (softmax) exact.
inline NodeId log_sum_exp_rows(Graph& g, NodeId logits) {
  NodeId m = g.row_max_const(logits);
  NodeId shifted = g.sub(logits, g.broadcast_cols(m, g.value(logits).cols()));
  return g.add(m, g.log_(g.row_sum(g.exp_(shifted))));
}

// Mean negative log-likelihood of per-row gold columns under softmax(logits).
inline NodeId softmax_nll(Graph& g, NodeId logits, const std::vector<long>& gold) {
  NodeId lse = log_sum_exp_rows(g, logits);
  NodeId picked = g.take_per_row(logits, gold);
  return g.mean(g.sub(lse, picked));
}

}  // namespace ontozsl
