#include "ontozsl/graph.hpp"

#include <algorithm>
#include <cmath>

namespace ontozsl {

namespace {

const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Input: return "input";
    case Op::Param: return "param";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::AddRowVec: return "add_rowvec";
    case Op::Scale: return "scale";
    case Op::AddScalar: return "add_scalar";
    case Op::MatMul: return "matmul";
    case Op::Transpose: return "transpose";
    case Op::ConcatCols: return "concat_cols";
    case Op::ConcatRows: return "concat_rows";
    case Op::SliceCols: return "slice_cols";
    case Op::PadCols: return "pad_cols";
    case Op::GatherRows: return "gather_rows";
    case Op::ScatterRows: return "scatter_rows";
    case Op::TakePerRow: return "take_per_row";
    case Op::ScatterPerRow: return "scatter_per_row";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::RowSum: return "row_sum";
    case Op::ColSum: return "col_sum";
    case Op::RowMaxConst: return "row_max_const";
    case Op::BroadcastCols: return "broadcast_cols";
    case Op::BroadcastRows: return "broadcast_rows";
    case Op::BroadcastFull: return "broadcast_full";
    case Op::Tanh: return "tanh";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Square: return "square";
    case Op::LeakyRelu: return "leaky_relu";
    case Op::LeakyReluMask: return "leaky_relu_mask";
  }
  return "?";
}

}  // namespace

const Tensor& Graph::value(NodeId id) const {
  require(id >= 0 && static_cast<size_t>(id) < nodes_.size(), "bad node id");
  return nodes_[static_cast<size_t>(id)].value;
}

NodeId Graph::emit(Node n) {
  eval(n);
  n.value.check_finite(op_name(n.op));
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Graph::eval(Node& n) const {
  auto in = [&](NodeId id) -> const Tensor& { return value(id); };
  switch (n.op) {
    case Op::Const:
    case Op::Input:
    case Op::Param:
      break;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const Tensor &a = in(n.a), &b = in(n.b);
      require(a.same_shape(b), std::string(op_name(n.op)) + ": shape mismatch");
      Tensor out(a.rows(), a.cols());
      for (long i = 0; i < a.size(); ++i) {
        switch (n.op) {
          case Op::Add: out[i] = a[i] + b[i]; break;
          case Op::Sub: out[i] = a[i] - b[i]; break;
          case Op::Mul: out[i] = a[i] * b[i]; break;
          default: out[i] = a[i] / b[i]; break;
        }
      }
      n.value = std::move(out);
      break;
    }
    case Op::AddRowVec: {
      const Tensor &a = in(n.a), &b = in(n.b);
      require(b.rows() == 1 && b.cols() == a.cols(), "add_rowvec: shape mismatch");
      Tensor out(a.rows(), a.cols());
      for (long r = 0; r < a.rows(); ++r)
        for (long c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(r, c) + b.at(0, c);
      n.value = std::move(out);
      break;
    }
    case Op::Scale: {
      const Tensor& a = in(n.a);
      Tensor out(a.rows(), a.cols());
      for (long i = 0; i < a.size(); ++i) out[i] = a[i] * n.scalar;
      n.value = std::move(out);
      break;
    }
    case Op::AddScalar: {
      const Tensor& a = in(n.a);
      Tensor out(a.rows(), a.cols());
      for (long i = 0; i < a.size(); ++i) out[i] = a[i] + n.scalar;
      n.value = std::move(out);
      break;
    }
    case Op::MatMul: {
      const Tensor &a = in(n.a), &b = in(n.b);
      require(a.cols() == b.rows(), "matmul: inner dimension mismatch");
      const long m = a.rows(), k = a.cols(), p = b.cols();
      Tensor out(m, p, 0.0);
      for (long i = 0; i < m; ++i) {
        const double* arow = a.data() + i * k;
        double* orow = out.data() + i * p;
        for (long kk = 0; kk < k; ++kk) {
          const double av = arow[kk];
          if (av == 0.0) continue;
          const double* brow = b.data() + kk * p;
          for (long j = 0; j < p; ++j) orow[j] += av * brow[j];
        }
      }
      n.value = std::move(out);
      break;
    }
    case Op::Transpose: {
      const Tensor& a = in(n.a);
      Tensor out(a.cols(), a.rows());
      for (long r = 0; r < a.rows(); ++r)
        for (long c = 0; c < a.cols(); ++c) out.at(c, r) = a.at(r, c);
      n.value = std::move(out);
      break;
    }
    case Op::ConcatCols: {
      const Tensor &a = in(n.a), &b = in(n.b);
      require(a.rows() == b.rows(), "concat_cols: row mismatch");
      Tensor out(a.rows(), a.cols() + b.cols());
      for (long r = 0; r < a.rows(); ++r) {
        for (long c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(r, c);
        for (long c = 0; c < b.cols(); ++c) out.at(r, a.cols() + c) = b.at(r, c);
      }
      n.value = std::move(out);
      break;
    }
    case Op::ConcatRows: {
      const Tensor &a = in(n.a), &b = in(n.b);
      require(a.cols() == b.cols(), "concat_rows: column mismatch");
      Tensor out(a.rows() + b.rows(), a.cols());
      for (long r = 0; r < a.rows(); ++r)
        for (long c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(r, c);
      for (long r = 0; r < b.rows(); ++r)
        for (long c = 0; c < a.cols(); ++c) out.at(a.rows() + r, c) = b.at(r, c);
      n.value = std::move(out);
      break;
    }
    case Op::SliceCols: {
      const Tensor& a = in(n.a);
      require(n.i0 >= 0 && n.i1 > 0 && n.i0 + n.i1 <= a.cols(), "slice_cols: out of range");
      Tensor out(a.rows(), n.i1);
      for (long r = 0; r < a.rows(); ++r)
        for (long c = 0; c < n.i1; ++c) out.at(r, c) = a.at(r, n.i0 + c);
      n.value = std::move(out);
      break;
    }
    case Op::PadCols: {
      const Tensor& a = in(n.a);
      require(n.i0 >= 0 && n.i0 + a.cols() <= n.i1, "pad_cols: out of range");
      Tensor out(a.rows(), n.i1, 0.0);
      for (long r = 0; r < a.rows(); ++r)
        for (long c = 0; c < a.cols(); ++c) out.at(r, n.i0 + c) = a.at(r, c);
      n.value = std::move(out);
      break;
    }
    case Op::GatherRows: {
      const Tensor& a = in(n.a);
      const auto& ix = *n.idx;
      Tensor out(static_cast<long>(ix.size()), a.cols());
      for (size_t r = 0; r < ix.size(); ++r) {
        require(ix[r] >= 0 && ix[r] < a.rows(), "gather_rows: index out of range");
        for (long c = 0; c < a.cols(); ++c) out.at(static_cast<long>(r), c) = a.at(ix[r], c);
      }
      n.value = std::move(out);
      break;
    }
    case Op::ScatterRows: {
      const Tensor& a = in(n.a);
      const auto& ix = *n.idx;
      require(a.rows() == static_cast<long>(ix.size()), "scatter_rows: index count mismatch");
      Tensor out(n.i0, a.cols(), 0.0);
      for (size_t r = 0; r < ix.size(); ++r) {
        require(ix[r] >= 0 && ix[r] < n.i0, "scatter_rows: index out of range");
        for (long c = 0; c < a.cols(); ++c) out.at(ix[r], c) += a.at(static_cast<long>(r), c);
      }
      n.value = std::move(out);
      break;
    }
    case Op::TakePerRow: {
      const Tensor& a = in(n.a);
      const auto& ix = *n.idx;
      require(a.rows() == static_cast<long>(ix.size()), "take_per_row: index count mismatch");
      Tensor out(a.rows(), 1);
      for (long r = 0; r < a.rows(); ++r) {
        require(ix[r] >= 0 && ix[r] < a.cols(), "take_per_row: index out of range");
        out.at(r, 0) = a.at(r, ix[static_cast<size_t>(r)]);
      }
      n.value = std::move(out);
      break;
    }
    case Op::ScatterPerRow: {
      const Tensor& a = in(n.a);
      const auto& ix = *n.idx;
      require(a.cols() == 1 && a.rows() == static_cast<long>(ix.size()),
              "scatter_per_row: bad input");
      Tensor out(a.rows(), n.i0, 0.0);
      for (long r = 0; r < a.rows(); ++r) {
        require(ix[r] >= 0 && ix[r] < n.i0, "scatter_per_row: index out of range");
        out.at(r, ix[static_cast<size_t>(r)]) = a.at(r, 0);
      }
      n.value = std::move(out);
      break;
    }
    case Op::Sum:
    case Op::Mean: {
      const Tensor& a = in(n.a);
      double s = 0;
      for (long i = 0; i < a.size(); ++i) s += a[i];
      if (n.op == Op::Mean) s /= static_cast<double>(a.size());
      n.value = Tensor::scalar(s);
      break;
    }
    case Op::RowSum: {
      const Tensor& a = in(n.a);
      Tensor out(a.rows(), 1, 0.0);
      for (long r = 0; r < a.rows(); ++r)
        for (long c = 0; c < a.cols(); ++c) out.at(r, 0) += a.at(r, c);
      n.value = std::move(out);
      break;
    }
    case Op::ColSum: {
      const Tensor& a = in(n.a);
      Tensor out(1, a.cols(), 0.0);
      for (long r = 0; r < a.rows(); ++r)
        for (long c = 0; c < a.cols(); ++c) out.at(0, c) += a.at(r, c);
      n.value = std::move(out);
      break;
    }
    case Op::RowMaxConst: {
      const Tensor& a = in(n.a);
      Tensor out(a.rows(), 1);
      for (long r = 0; r < a.rows(); ++r) {
        double m = a.at(r, 0);
        for (long c = 1; c < a.cols(); ++c) m = std::max(m, a.at(r, c));
        out.at(r, 0) = m;
      }
      n.value = std::move(out);
      break;
    }
    case Op::BroadcastCols: {
      const Tensor& a = in(n.a);
      require(a.cols() == 1, "broadcast_cols: expects column vector");
      Tensor out(a.rows(), n.i0);
      for (long r = 0; r < a.rows(); ++r)
        for (long c = 0; c < n.i0; ++c) out.at(r, c) = a.at(r, 0);
      n.value = std::move(out);
      break;
    }
    case Op::BroadcastRows: {
      const Tensor& a = in(n.a);
      require(a.rows() == 1, "broadcast_rows: expects row vector");
      Tensor out(n.i0, a.cols());
      for (long r = 0; r < n.i0; ++r)
        for (long c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(0, c);
      n.value = std::move(out);
      break;
    }
    case Op::BroadcastFull: {
      const Tensor& a = in(n.a);
      require(a.size() == 1, "broadcast_full: expects scalar");
      n.value = Tensor(n.i0, n.i1, a[0]);
      break;
    }
    case Op::Tanh:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
    case Op::Square: {
      const Tensor& a = in(n.a);
      Tensor out(a.rows(), a.cols());
      for (long i = 0; i < a.size(); ++i) {
        switch (n.op) {
          case Op::Tanh: out[i] = std::tanh(a[i]); break;
          case Op::Exp: out[i] = std::exp(a[i]); break;
          case Op::Log: out[i] = std::log(a[i]); break;
          case Op::Sqrt: out[i] = std::sqrt(a[i]); break;
          default: out[i] = a[i] * a[i]; break;
        }
      }
      n.value = std::move(out);
      break;
    }
    case Op::LeakyRelu: {
      const Tensor& a = in(n.a);
      Tensor out(a.rows(), a.cols());
      for (long i = 0; i < a.size(); ++i) out[i] = a[i] > 0 ? a[i] : n.scalar * a[i];
      n.value = std::move(out);
      break;
    }
    case Op::LeakyReluMask: {
      const Tensor& a = in(n.a);
      Tensor out(a.rows(), a.cols());
      for (long i = 0; i < a.size(); ++i) out[i] = a[i] > 0 ? 1.0 : n.scalar;
      n.value = std::move(out);
      break;
    }
  }
}

NodeId Graph::constant(Tensor t) {
  Node n;
  n.op = Op::Const;
  n.value = std::move(t);
  n.value.check_finite("const");
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::input(Tensor t) {
  Node n;
  n.op = Op::Input;
  n.value = std::move(t);
  n.value.check_finite("input");
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::param(Tensor t) {
  Node n;
  n.op = Op::Param;
  n.value = std::move(t);
  n.value.check_finite("param");
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::add(NodeId a, NodeId b) { Node n; n.op = Op::Add; n.a = a; n.b = b; return emit(std::move(n)); }
NodeId Graph::sub(NodeId a, NodeId b) { Node n; n.op = Op::Sub; n.a = a; n.b = b; return emit(std::move(n)); }
NodeId Graph::mul(NodeId a, NodeId b) { Node n; n.op = Op::Mul; n.a = a; n.b = b; return emit(std::move(n)); }
NodeId Graph::div(NodeId a, NodeId b) { Node n; n.op = Op::Div; n.a = a; n.b = b; return emit(std::move(n)); }

NodeId Graph::add_rowvec(NodeId a, NodeId b) {
  Node n;
  n.op = Op::AddRowVec;
  n.a = a;
  n.b = b;
  return emit(std::move(n));
}

NodeId Graph::scale(NodeId a, double c) {
  Node n;
  n.op = Op::Scale;
  n.a = a;
  n.scalar = c;
  return emit(std::move(n));
}

NodeId Graph::add_scalar(NodeId a, double c) {
  Node n;
  n.op = Op::AddScalar;
  n.a = a;
  n.scalar = c;
  return emit(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) { Node n; n.op = Op::MatMul; n.a = a; n.b = b; return emit(std::move(n)); }
NodeId Graph::transpose(NodeId a) { Node n; n.op = Op::Transpose; n.a = a; return emit(std::move(n)); }
NodeId Graph::concat_cols(NodeId a, NodeId b) { Node n; n.op = Op::ConcatCols; n.a = a; n.b = b; return emit(std::move(n)); }

NodeId Graph::concat_rows(NodeId a, NodeId b) { Node n; n.op = Op::ConcatRows; n.a = a; n.b = b; return emit(std::move(n)); }

NodeId Graph::slice_cols(NodeId a, long begin, long len) {
  Node n;
  n.op = Op::SliceCols;
  n.a = a;
  n.i0 = begin;
  n.i1 = len;
  return emit(std::move(n));
}

NodeId Graph::pad_cols(NodeId a, long begin, long total) {
  Node n;
  n.op = Op::PadCols;
  n.a = a;
  n.i0 = begin;
  n.i1 = total;
  return emit(std::move(n));
}

NodeId Graph::gather_rows(NodeId a, std::vector<long> idx) {
  Node n;
  n.op = Op::GatherRows;
  n.a = a;
  n.idx = std::make_shared<std::vector<long>>(std::move(idx));
  return emit(std::move(n));
}

NodeId Graph::scatter_rows(NodeId a, std::vector<long> idx, long total_rows) {
  Node n;
  n.op = Op::ScatterRows;
  n.a = a;
  n.i0 = total_rows;
  n.idx = std::make_shared<std::vector<long>>(std::move(idx));
  return emit(std::move(n));
}

NodeId Graph::take_per_row(NodeId a, std::vector<long> idx) {
  Node n;
  n.op = Op::TakePerRow;
  n.a = a;
  n.idx = std::make_shared<std::vector<long>>(std::move(idx));
  return emit(std::move(n));
}

NodeId Graph::scatter_per_row(NodeId a, std::vector<long> idx, long total_cols) {
  Node n;
  n.op = Op::ScatterPerRow;
  n.a = a;
  n.i0 = total_cols;
  n.idx = std::make_shared<std::vector<long>>(std::move(idx));
  return emit(std::move(n));
}

NodeId Graph::sum(NodeId a) { Node n; n.op = Op::Sum; n.a = a; return emit(std::move(n)); }
NodeId Graph::mean(NodeId a) { Node n; n.op = Op::Mean; n.a = a; return emit(std::move(n)); }
NodeId Graph::row_sum(NodeId a) { Node n; n.op = Op::RowSum; n.a = a; return emit(std::move(n)); }
NodeId Graph::col_sum(NodeId a) { Node n; n.op = Op::ColSum; n.a = a; return emit(std::move(n)); }
NodeId Graph::row_max_const(NodeId a) { Node n; n.op = Op::RowMaxConst; n.a = a; return emit(std::move(n)); }

NodeId Graph::broadcast_cols(NodeId a, long ncols) {
  Node n;
  n.op = Op::BroadcastCols;
  n.a = a;
  n.i0 = ncols;
  return emit(std::move(n));
}

NodeId Graph::broadcast_rows(NodeId a, long nrows) {
  Node n;
  n.op = Op::BroadcastRows;
  n.a = a;
  n.i0 = nrows;
  return emit(std::move(n));
}

NodeId Graph::broadcast_full(NodeId a, long m, long ncols) {
  Node n;
  n.op = Op::BroadcastFull;
  n.a = a;
  n.i0 = m;
  n.i1 = ncols;
  return emit(std::move(n));
}

NodeId Graph::tanh_(NodeId a) { Node n; n.op = Op::Tanh; n.a = a; return emit(std::move(n)); }
NodeId Graph::exp_(NodeId a) { Node n; n.op = Op::Exp; n.a = a; return emit(std::move(n)); }
NodeId Graph::log_(NodeId a) { Node n; n.op = Op::Log; n.a = a; return emit(std::move(n)); }
NodeId Graph::sqrt_(NodeId a) { Node n; n.op = Op::Sqrt; n.a = a; return emit(std::move(n)); }
NodeId Graph::square(NodeId a) { Node n; n.op = Op::Square; n.a = a; return emit(std::move(n)); }

NodeId Graph::leaky_relu(NodeId a, double slope) {
  Node n;
  n.op = Op::LeakyRelu;
  n.a = a;
  n.scalar = slope;
  return emit(std::move(n));
}

NodeId Graph::leaky_relu_mask(NodeId a, double slope) {
  Node n;
  n.op = Op::LeakyReluMask;
  n.a = a;
  n.scalar = slope;
  return emit(std::move(n));
}

std::vector<NodeId> Graph::adjoints(NodeId output, const std::vector<NodeId>& wrt) {
  require(output >= 0 && static_cast<size_t>(output) < nodes_.size(), "adjoints: bad output node");
  const size_t frontier = nodes_.size();
  std::vector<NodeId> adj(frontier, -1);
  const Tensor& out_val = value(output);
  adj[static_cast<size_t>(output)] = constant(Tensor(out_val.rows(), out_val.cols(), 1.0));

  auto accumulate = [&](NodeId target, NodeId contrib) {
    if (target < 0) return;
    NodeId& slot = adj[static_cast<size_t>(target)];
    slot = slot < 0 ? contrib : add(slot, contrib);
  };

  for (NodeId id = output; id >= 0; --id) {
    const NodeId g = adj[static_cast<size_t>(id)];
    if (g < 0) continue;
    // Copy what backward needs; emitting adjoint nodes may reallocate nodes_.
    const Op op = nodes_[static_cast<size_t>(id)].op;
    const NodeId a = nodes_[static_cast<size_t>(id)].a;
    const NodeId b = nodes_[static_cast<size_t>(id)].b;
    const double sc = nodes_[static_cast<size_t>(id)].scalar;
    const long i0 = nodes_[static_cast<size_t>(id)].i0;
    auto idxp = nodes_[static_cast<size_t>(id)].idx;
    switch (op) {
      case Op::Const:
      case Op::Input:
      case Op::Param:
      case Op::RowMaxConst:
      case Op::LeakyReluMask:
        break;  // leaves and stop-gradient views
      case Op::Add:
        accumulate(a, g);
        accumulate(b, g);
        break;
      case Op::Sub:
        accumulate(a, g);
        accumulate(b, scale(g, -1.0));
        break;
      case Op::Mul:
        accumulate(a, mul(g, b));
        accumulate(b, mul(g, a));
        break;
      case Op::Div:
        accumulate(a, div(g, b));
        accumulate(b, scale(mul(g, div(id, b)), -1.0));
        break;
      case Op::AddRowVec:
        accumulate(a, g);
        accumulate(b, col_sum(g));
        break;
      case Op::Scale:
        accumulate(a, scale(g, sc));
        break;
      case Op::AddScalar:
        accumulate(a, g);
        break;
      case Op::MatMul:
        accumulate(a, matmul(g, transpose(b)));
        accumulate(b, matmul(transpose(a), g));
        break;
      case Op::Transpose:
        accumulate(a, transpose(g));
        break;
      case Op::ConcatCols: {
        const long ac = value(a).cols(), bc = value(b).cols();
        accumulate(a, slice_cols(g, 0, ac));
        accumulate(b, slice_cols(g, ac, bc));
        break;
      }
      case Op::ConcatRows: {
        const long ar = value(a).rows(), br = value(b).rows();
        std::vector<long> top(static_cast<size_t>(ar)), bottom(static_cast<size_t>(br));
        for (long r = 0; r < ar; ++r) top[static_cast<size_t>(r)] = r;
        for (long r = 0; r < br; ++r) bottom[static_cast<size_t>(r)] = ar + r;
        accumulate(a, gather_rows(g, top));
        accumulate(b, gather_rows(g, bottom));
        break;
      }
      case Op::SliceCols:
        accumulate(a, pad_cols(g, i0, value(a).cols()));
        break;
      case Op::PadCols:
        accumulate(a, slice_cols(g, i0, value(a).cols()));
        break;
      case Op::GatherRows:
        accumulate(a, scatter_rows(g, *idxp, value(a).rows()));
        break;
      case Op::ScatterRows:
        accumulate(a, gather_rows(g, *idxp));
        break;
      case Op::TakePerRow:
        accumulate(a, scatter_per_row(g, *idxp, value(a).cols()));
        break;
      case Op::ScatterPerRow:
        accumulate(a, take_per_row(g, *idxp));
        break;
      case Op::Sum:
        accumulate(a, broadcast_full(g, value(a).rows(), value(a).cols()));
        break;
      case Op::Mean:
        accumulate(a, scale(broadcast_full(g, value(a).rows(), value(a).cols()),
                            1.0 / static_cast<double>(value(a).size())));
        break;
      case Op::RowSum:
        accumulate(a, broadcast_cols(g, value(a).cols()));
        break;
      case Op::ColSum:
        accumulate(a, broadcast_rows(g, value(a).rows()));
        break;
      case Op::BroadcastCols:
        accumulate(a, row_sum(g));
        break;
      case Op::BroadcastRows:
        accumulate(a, col_sum(g));
        break;
      case Op::BroadcastFull:
        accumulate(a, sum(g));
        break;
      case Op::Tanh:
        // g * (1 - tanh^2)
        accumulate(a, mul(g, add_scalar(scale(square(id), -1.0), 1.0)));
        break;
      case Op::Exp:
        accumulate(a, mul(g, id));
        break;
      case Op::Log:
        accumulate(a, div(g, a));
        break;
      case Op::Sqrt:
        accumulate(a, div(scale(g, 0.5), id));
        break;
      case Op::Square:
        accumulate(a, mul(g, scale(a, 2.0)));
        break;
      case Op::LeakyRelu:
        accumulate(a, mul(g, leaky_relu_mask(a, sc)));
        break;
    }
  }

  std::vector<NodeId> result;
  result.reserve(wrt.size());
  for (NodeId w : wrt) {
    require(w >= 0 && static_cast<size_t>(w) < frontier, "adjoints: wrt node not in graph");
    result.push_back(adj[static_cast<size_t>(w)]);
  }
  return result;
}

std::vector<Tensor> Graph::grad(NodeId loss, const std::vector<NodeId>& params) {
  require(value(loss).size() == 1, "grad: loss must be a scalar");
  for (NodeId p : params)
    require(op_of(p) == Op::Param, "grad: node is not a parameter leaf");
  std::vector<NodeId> adj = adjoints(loss, params);
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    const Tensor& pv = value(params[i]);
    out.push_back(adj[i] < 0 ? Tensor(pv.rows(), pv.cols(), 0.0) : value(adj[i]));
  }
  return out;
}

NodeId Graph::input_grad(NodeId output, NodeId in) {
  require(value(output).size() == 1, "input_grad: output must be a scalar");
  require(op_of(in) == Op::Input, "input_grad: node is not an input leaf");
  NodeId adj = adjoints(output, {in})[0];
  if (adj < 0) {
    const Tensor& iv = value(in);
    return constant(Tensor(iv.rows(), iv.cols(), 0.0));
  }
  return adj;
}

NodeId Graph::input_grad_norm(NodeId output, NodeId in) {
  return sqrt_(sum(square(input_grad(output, in))));
}

}  // namespace ontozsl
