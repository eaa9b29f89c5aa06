#ifndef TATN_TAPE_HPP
#define TATN_TAPE_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tatn/kernels.hpp"
#include "tatn/tensor.hpp"

namespace tatn {

using NodeId = int;

enum class OpKind {
  Leaf,
  MatMul,
  Add,
  Sub,
  Mul,
  Tanh,
  Sigmoid,
  Exp,
  SoftmaxRow,
  LogSoftmaxRow,
  LogsumexpRow,
  Concat,
  Slice,
  EmbeddingLookup,
  ScalarMul,
  Transpose,
};

inline const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::Leaf: return "leaf";
    case OpKind::MatMul: return "matmul";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "elementwise-mul";
    case OpKind::Tanh: return "tanh";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::Exp: return "exp";
    case OpKind::SoftmaxRow: return "softmax-row";
    case OpKind::LogSoftmaxRow: return "log-softmax-row";
    case OpKind::LogsumexpRow: return "logsumexp-row";
    case OpKind::Concat: return "concat";
    case OpKind::Slice: return "slice";
    case OpKind::EmbeddingLookup: return "embedding-lookup";
    case OpKind::ScalarMul: return "scalar-mul";
    case OpKind::Transpose: return "transpose";
  }
  return "?";
}

template <typename T>
struct Attrs {
  bool trans_a = false, trans_b = false;  // matmul
  int axis = 0, start = 0, len = 0;       // concat / slice
  T scalar = T(0);                        // scalar-mul
  std::vector<int> ids;                   // embedding-lookup
};

template <typename T>
struct TapeNode {
  OpKind op;
  std::vector<NodeId> inputs;
  Attrs<T> attrs;
  Tensor<T> value;
};

// Append-only record of an eagerly evaluated computation. Inputs of node k
// always have ids < k, so one reverse sweep visits each node exactly once.
// A tape is single-owner: recording and backward must not be shared across
// threads (read-only parameter tensors may be).
template <typename T>
class Tape {
 public:
  NodeId leaf(Tensor<T> v) {
    nodes_.push_back({OpKind::Leaf, {}, {}, std::move(v)});
    return static_cast<NodeId>(nodes_.size()) - 1;
  }

  NodeId record(OpKind op, std::vector<NodeId> inputs, Attrs<T> attrs = {});

  const Tensor<T>& value(NodeId id) const { return nodes_[id].value; }
  const TapeNode<T>& node(NodeId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // Gradients of a scalar loss w.r.t. every node, indexed by node id.
  // Nodes the loss does not depend on get zero gradients.
  std::vector<Tensor<T>> backward(NodeId loss) const;

 private:
  Tensor<T> forward(OpKind op, const std::vector<NodeId>& in,
                    const Attrs<T>& attrs) const;
  void check_input(NodeId id) const {
    if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
      throw ContractError("tape: input node id out of range");
  }
  [[noreturn]] void throw_dim(OpKind op, const std::vector<NodeId>& in,
                              const std::string& extra) const {
    std::string msg = std::string("op ") + op_name(op) + ": " + extra +
                      " (shapes:";
    for (NodeId id : in) msg += " " + nodes_[id].value.shape_str();
    msg += ")";
    throw DimensionError(msg);
  }

  std::vector<TapeNode<T>> nodes_;
};

namespace detail {

template <typename T>
inline void rows_softmax(const Tensor<T>& x, Tensor<T>& out) {
  int n = x.cols();
  for (int i = 0; i < x.rows(); ++i) {
    const T* xr = x.row_ptr(i);
    T* yr = out.row_ptr(i);
    T m = kern::vmax(n, xr);
    kern::vaddc(n, xr, -m, yr);
    kern::vexp(n, yr, yr);
    T s = kern::vsum(n, yr);
    kern::vscale(n, yr, T(1) / s, yr);
  }
}

template <typename T>
inline T row_logsumexp(const T* xr, int n) {
  T m = kern::vmax(n, xr);
  std::vector<T> tmp(n);
  kern::vaddc(n, xr, -m, tmp.data());
  kern::vexp(n, tmp.data(), tmp.data());
  return m + std::log(kern::vsum(n, tmp.data()));
}

}  // namespace detail

template <typename T>
Tensor<T> Tape<T>::forward(OpKind op, const std::vector<NodeId>& in,
                           const Attrs<T>& attrs) const {
  auto dim_error = [&](const std::string& extra) { throw_dim(op, in, extra); };
  auto arity = [&](std::size_t n) {
    if (in.size() != n) dim_error("bad arity");
  };

  switch (op) {
    case OpKind::Leaf:
      throw ContractError("record: leaves are created via Tape::leaf");

    case OpKind::MatMul: {
      arity(2);
      if (attrs.trans_a && attrs.trans_b)
        throw ContractError("matmul: trans_a && trans_b is not supported");
      const Tensor<T>& a = nodes_[in[0]].value;
      const Tensor<T>& b = nodes_[in[1]].value;
      int m = attrs.trans_a ? a.cols() : a.rows();
      int ka = attrs.trans_a ? a.rows() : a.cols();
      int kb = attrs.trans_b ? b.cols() : b.rows();
      int n = attrs.trans_b ? b.rows() : b.cols();
      if (ka != kb) dim_error("inner dimensions differ");
      Tensor<T> c(m, n);
      kern::gemm(attrs.trans_a, attrs.trans_b, false, m, n, ka, a.data(),
                 b.data(), c.data());
      return c;
    }

    case OpKind::Add: {
      arity(2);
      const Tensor<T>& a = nodes_[in[0]].value;
      const Tensor<T>& b = nodes_[in[1]].value;
      Tensor<T> c(a.rows(), a.cols());
      if (a.same_shape(b)) {
        kern::vadd(static_cast<int>(a.size()), a.data(), b.data(), c.data());
      } else if (b.rows() == 1 && b.cols() == a.cols()) {
        // row-vector broadcast over the rows of a
        for (int i = 0; i < a.rows(); ++i)
          kern::vadd(a.cols(), a.row_ptr(i), b.data(), c.row_ptr(i));
      } else {
        dim_error("operands must match or rhs must be a broadcastable row");
      }
      return c;
    }

    case OpKind::Sub: {
      arity(2);
      const Tensor<T>& a = nodes_[in[0]].value;
      const Tensor<T>& b = nodes_[in[1]].value;
      if (!a.same_shape(b)) dim_error("operands must have equal shapes");
      Tensor<T> c(a.rows(), a.cols());
      kern::vsub(static_cast<int>(a.size()), a.data(), b.data(), c.data());
      return c;
    }

    case OpKind::Mul: {
      arity(2);
      const Tensor<T>& a = nodes_[in[0]].value;
      const Tensor<T>& b = nodes_[in[1]].value;
      if (!a.same_shape(b)) dim_error("operands must have equal shapes");
      Tensor<T> c(a.rows(), a.cols());
      kern::vmul(static_cast<int>(a.size()), a.data(), b.data(), c.data());
      return c;
    }

    case OpKind::Tanh:
    case OpKind::Sigmoid:
    case OpKind::Exp: {
      arity(1);
      const Tensor<T>& a = nodes_[in[0]].value;
      Tensor<T> c(a.rows(), a.cols());
      int n = static_cast<int>(a.size());
      if (op == OpKind::Tanh) kern::vtanh(n, a.data(), c.data());
      else if (op == OpKind::Sigmoid) kern::vsigmoid(n, a.data(), c.data());
      else kern::vexp(n, a.data(), c.data());
      return c;
    }

    case OpKind::SoftmaxRow: {
      arity(1);
      const Tensor<T>& a = nodes_[in[0]].value;
      Tensor<T> c(a.rows(), a.cols());
      detail::rows_softmax(a, c);
      return c;
    }

    case OpKind::LogSoftmaxRow: {
      arity(1);
      const Tensor<T>& a = nodes_[in[0]].value;
      Tensor<T> c(a.rows(), a.cols());
      for (int i = 0; i < a.rows(); ++i) {
        T lse = detail::row_logsumexp(a.row_ptr(i), a.cols());
        kern::vaddc(a.cols(), a.row_ptr(i), -lse, c.row_ptr(i));
      }
      return c;
    }

    case OpKind::LogsumexpRow: {
      arity(1);
      const Tensor<T>& a = nodes_[in[0]].value;
      Tensor<T> c(a.rows(), 1);
      for (int i = 0; i < a.rows(); ++i)
        c(i, 0) = detail::row_logsumexp(a.row_ptr(i), a.cols());
      return c;
    }

    case OpKind::Concat: {
      if (in.empty()) dim_error("concat needs at least one input");
      if (attrs.axis == 0) {
        int cols = nodes_[in[0]].value.cols(), rows = 0;
        for (NodeId id : in) {
          if (nodes_[id].value.cols() != cols) dim_error("column counts differ");
          rows += nodes_[id].value.rows();
        }
        Tensor<T> c(rows, cols);
        int r = 0;
        for (NodeId id : in) {
          const Tensor<T>& v = nodes_[id].value;
          std::copy(v.data(), v.data() + v.size(), c.row_ptr(r));
          r += v.rows();
        }
        return c;
      }
      if (attrs.axis == 1) {
        int rows = nodes_[in[0]].value.rows(), cols = 0;
        for (NodeId id : in) {
          if (nodes_[id].value.rows() != rows) dim_error("row counts differ");
          cols += nodes_[id].value.cols();
        }
        Tensor<T> c(rows, cols);
        int off = 0;
        for (NodeId id : in) {
          const Tensor<T>& v = nodes_[id].value;
          for (int i = 0; i < rows; ++i)
            std::copy(v.row_ptr(i), v.row_ptr(i) + v.cols(),
                      c.row_ptr(i) + off);
          off += v.cols();
        }
        return c;
      }
      throw_dim(op, in, "concat axis must be 0 or 1");
    }

    case OpKind::Slice: {
      arity(1);
      const Tensor<T>& a = nodes_[in[0]].value;
      int limit = attrs.axis == 0 ? a.rows() : a.cols();
      if (attrs.axis != 0 && attrs.axis != 1) dim_error("slice axis must be 0 or 1");
      if (attrs.start < 0 || attrs.len <= 0 || attrs.start + attrs.len > limit)
        dim_error("slice range [" + std::to_string(attrs.start) + "," +
                  std::to_string(attrs.start + attrs.len) + ") out of bounds");
      if (attrs.axis == 0) {
        Tensor<T> c(attrs.len, a.cols());
        std::copy(a.row_ptr(attrs.start), a.row_ptr(attrs.start) + c.size(),
                  c.data());
        return c;
      }
      Tensor<T> c(a.rows(), attrs.len);
      for (int i = 0; i < a.rows(); ++i)
        std::copy(a.row_ptr(i) + attrs.start,
                  a.row_ptr(i) + attrs.start + attrs.len, c.row_ptr(i));
      return c;
    }

    case OpKind::EmbeddingLookup: {
      arity(1);
      const Tensor<T>& table = nodes_[in[0]].value;
      if (attrs.ids.empty()) dim_error("embedding-lookup needs ids");
      Tensor<T> c(static_cast<int>(attrs.ids.size()), table.cols());
      for (std::size_t r = 0; r < attrs.ids.size(); ++r) {
        int id = attrs.ids[r];
        if (id < 0 || id >= table.rows())
          throw ContractError("embedding-lookup: id " + std::to_string(id) +
                              " out of range [0," +
                              std::to_string(table.rows()) + ")");
        std::copy(table.row_ptr(id), table.row_ptr(id) + table.cols(),
                  c.row_ptr(static_cast<int>(r)));
      }
      return c;
    }

    case OpKind::ScalarMul: {
      arity(1);
      const Tensor<T>& a = nodes_[in[0]].value;
      Tensor<T> c(a.rows(), a.cols());
      kern::vscale(static_cast<int>(a.size()), a.data(), attrs.scalar,
                   c.data());
      return c;
    }

    case OpKind::Transpose: {
      arity(1);
      const Tensor<T>& a = nodes_[in[0]].value;
      Tensor<T> c(a.cols(), a.rows());
      for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) c(j, i) = a(i, j);
      return c;
    }
  }
  throw ContractError("record: unknown op kind");
}

template <typename T>
NodeId Tape<T>::record(OpKind op, std::vector<NodeId> inputs, Attrs<T> attrs) {
  for (NodeId id : inputs) check_input(id);
  Tensor<T> out = forward(op, inputs, attrs);
  if (!out.all_finite())
    throw NumericError(std::string("op ") + op_name(op) +
                       " produced a non-finite value");
  nodes_.push_back({op, std::move(inputs), std::move(attrs), std::move(out)});
  return static_cast<NodeId>(nodes_.size()) - 1;
}

template <typename T>
std::vector<Tensor<T>> Tape<T>::backward(NodeId loss) const {
  check_input(loss);
  const Tensor<T>& lv = nodes_[loss].value;
  if (lv.rows() != 1 || lv.cols() != 1)
    throw ContractError("backward: loss must be a scalar node, got " +
                        lv.shape_str());

  std::vector<Tensor<T>> grads(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Tensor<T>& v = nodes_[i].value;
    grads[i] = Tensor<T>(v.rows(), v.cols());
  }
  grads[loss](0, 0) = T(1);

  for (NodeId id = loss; id >= 0; --id) {
    const TapeNode<T>& nd = nodes_[id];
    const Tensor<T>& g = grads[id];
    if (nd.op == OpKind::Leaf) continue;

    switch (nd.op) {
      case OpKind::MatMul: {
        const Tensor<T>& a = nodes_[nd.inputs[0]].value;
        const Tensor<T>& b = nodes_[nd.inputs[1]].value;
        Tensor<T>& ga = grads[nd.inputs[0]];
        Tensor<T>& gb = grads[nd.inputs[1]];
        int m = g.rows(), n = g.cols();
        if (!nd.attrs.trans_a && !nd.attrs.trans_b) {
          int k = a.cols();
          kern::gemm(false, true, true, m, k, n, g.data(), b.data(), ga.data());
          kern::gemm(true, false, true, k, n, m, a.data(), g.data(), gb.data());
        } else if (nd.attrs.trans_b) {  // C = A * B^T, raw b is n x k
          int k = a.cols();
          kern::gemm(false, false, true, m, k, n, g.data(), b.data(), ga.data());
          kern::gemm(true, false, true, n, k, m, g.data(), a.data(), gb.data());
        } else {  // C = A^T * B, raw a is k x m
          int k = a.rows();
          kern::gemm(false, true, true, k, m, n, b.data(), g.data(), ga.data());
          kern::gemm(false, false, true, k, n, m, a.data(), g.data(), gb.data());
        }
        break;
      }

      case OpKind::Add: {
        Tensor<T>& ga = grads[nd.inputs[0]];
        Tensor<T>& gb = grads[nd.inputs[1]];
        kern::axpy(static_cast<int>(g.size()), T(1), g.data(), ga.data());
        if (gb.same_shape(g)) {
          kern::axpy(static_cast<int>(g.size()), T(1), g.data(), gb.data());
        } else {  // broadcast row: gradient is the column sum
          for (int i = 0; i < g.rows(); ++i)
            kern::axpy(g.cols(), T(1), g.row_ptr(i), gb.data());
        }
        break;
      }

      case OpKind::Sub: {
        kern::axpy(static_cast<int>(g.size()), T(1), g.data(),
                   grads[nd.inputs[0]].data());
        kern::axpy(static_cast<int>(g.size()), T(-1), g.data(),
                   grads[nd.inputs[1]].data());
        break;
      }

      case OpKind::Mul: {
        const Tensor<T>& a = nodes_[nd.inputs[0]].value;
        const Tensor<T>& b = nodes_[nd.inputs[1]].value;
        T* ga = grads[nd.inputs[0]].data();
        T* gb = grads[nd.inputs[1]].data();
        const T* gd = g.data();
        for (std::int64_t i = 0; i < g.size(); ++i) {
          ga[i] += gd[i] * b.data()[i];
          gb[i] += gd[i] * a.data()[i];
        }
        break;
      }

      case OpKind::Tanh: {
        T* ga = grads[nd.inputs[0]].data();
        const T* y = nd.value.data();
        const T* gd = g.data();
        for (std::int64_t i = 0; i < g.size(); ++i)
          ga[i] += gd[i] * (T(1) - y[i] * y[i]);
        break;
      }

      case OpKind::Sigmoid: {
        T* ga = grads[nd.inputs[0]].data();
        const T* y = nd.value.data();
        const T* gd = g.data();
        for (std::int64_t i = 0; i < g.size(); ++i)
          ga[i] += gd[i] * y[i] * (T(1) - y[i]);
        break;
      }

      case OpKind::Exp: {
        T* ga = grads[nd.inputs[0]].data();
        const T* y = nd.value.data();
        const T* gd = g.data();
        for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += gd[i] * y[i];
        break;
      }

      case OpKind::SoftmaxRow: {
        Tensor<T>& ga = grads[nd.inputs[0]];
        for (int i = 0; i < g.rows(); ++i) {
          const T* y = nd.value.row_ptr(i);
          const T* gr = g.row_ptr(i);
          T dot = kern::vdot(g.cols(), gr, y);
          T* gar = ga.row_ptr(i);
          for (int j = 0; j < g.cols(); ++j) gar[j] += y[j] * (gr[j] - dot);
        }
        break;
      }

      case OpKind::LogSoftmaxRow: {
        Tensor<T>& ga = grads[nd.inputs[0]];
        for (int i = 0; i < g.rows(); ++i) {
          const T* y = nd.value.row_ptr(i);
          const T* gr = g.row_ptr(i);
          T s = kern::vsum(g.cols(), gr);
          T* gar = ga.row_ptr(i);
          for (int j = 0; j < g.cols(); ++j)
            gar[j] += gr[j] - std::exp(y[j]) * s;
        }
        break;
      }

      case OpKind::LogsumexpRow: {
        const Tensor<T>& x = nodes_[nd.inputs[0]].value;
        Tensor<T>& ga = grads[nd.inputs[0]];
        for (int i = 0; i < x.rows(); ++i) {
          T gi = g(i, 0), lse = nd.value(i, 0);
          const T* xr = x.row_ptr(i);
          T* gar = ga.row_ptr(i);
          for (int j = 0; j < x.cols(); ++j)
            gar[j] += gi * std::exp(xr[j] - lse);
        }
        break;
      }

      case OpKind::Concat: {
        if (nd.attrs.axis == 0) {
          int r = 0;
          for (NodeId src : nd.inputs) {
            Tensor<T>& gi = grads[src];
            kern::axpy(static_cast<int>(gi.size()), T(1), g.row_ptr(r),
                       gi.data());
            r += gi.rows();
          }
        } else {
          int off = 0;
          for (NodeId src : nd.inputs) {
            Tensor<T>& gi = grads[src];
            for (int i = 0; i < g.rows(); ++i)
              kern::axpy(gi.cols(), T(1), g.row_ptr(i) + off, gi.row_ptr(i));
            off += gi.cols();
          }
        }
        break;
      }

      case OpKind::Slice: {
        Tensor<T>& ga = grads[nd.inputs[0]];
        if (nd.attrs.axis == 0) {
          kern::axpy(static_cast<int>(g.size()), T(1), g.data(),
                     ga.row_ptr(nd.attrs.start));
        } else {
          for (int i = 0; i < g.rows(); ++i)
            kern::axpy(g.cols(), T(1), g.row_ptr(i),
                       ga.row_ptr(i) + nd.attrs.start);
        }
        break;
      }

      case OpKind::EmbeddingLookup: {
        Tensor<T>& ga = grads[nd.inputs[0]];  // sparse scatter-add by row
        for (std::size_t r = 0; r < nd.attrs.ids.size(); ++r)
          kern::axpy(g.cols(), T(1), g.row_ptr(static_cast<int>(r)),
                     ga.row_ptr(nd.attrs.ids[r]));
        break;
      }

      case OpKind::ScalarMul: {
        kern::axpy(static_cast<int>(g.size()), nd.attrs.scalar, g.data(),
                   grads[nd.inputs[0]].data());
        break;
      }

      case OpKind::Transpose: {
        Tensor<T>& ga = grads[nd.inputs[0]];
        for (int i = 0; i < g.rows(); ++i)
          for (int j = 0; j < g.cols(); ++j) ga(j, i) += g(i, j);
        break;
      }

      case OpKind::Leaf:
        break;
    }
  }
  return grads;
}

// Convenience builders over Tape::record.
namespace ad {

template <typename T>
NodeId matmul(Tape<T>& t, NodeId a, NodeId b, bool trans_a = false,
              bool trans_b = false) {
  Attrs<T> at;
  at.trans_a = trans_a;
  at.trans_b = trans_b;
  return t.record(OpKind::MatMul, {a, b}, at);
}
template <typename T>
NodeId add(Tape<T>& t, NodeId a, NodeId b) {
  return t.record(OpKind::Add, {a, b});
}
template <typename T>
NodeId sub(Tape<T>& t, NodeId a, NodeId b) {
  return t.record(OpKind::Sub, {a, b});
}
template <typename T>
NodeId mul(Tape<T>& t, NodeId a, NodeId b) {
  return t.record(OpKind::Mul, {a, b});
}
template <typename T>
NodeId tanh(Tape<T>& t, NodeId a) {
  return t.record(OpKind::Tanh, {a});
}
template <typename T>
NodeId sigmoid(Tape<T>& t, NodeId a) {
  return t.record(OpKind::Sigmoid, {a});
}
template <typename T>
NodeId exp(Tape<T>& t, NodeId a) {
  return t.record(OpKind::Exp, {a});
}
template <typename T>
NodeId softmax_row(Tape<T>& t, NodeId a) {
  return t.record(OpKind::SoftmaxRow, {a});
}
template <typename T>
NodeId log_softmax_row(Tape<T>& t, NodeId a) {
  return t.record(OpKind::LogSoftmaxRow, {a});
}
template <typename T>
NodeId logsumexp_row(Tape<T>& t, NodeId a) {
  return t.record(OpKind::LogsumexpRow, {a});
}
template <typename T>
NodeId concat(Tape<T>& t, std::vector<NodeId> parts, int axis) {
  Attrs<T> at;
  at.axis = axis;
  return t.record(OpKind::Concat, std::move(parts), at);
}
template <typename T>
NodeId slice(Tape<T>& t, NodeId a, int axis, int start, int len) {
  Attrs<T> at;
  at.axis = axis;
  at.start = start;
  at.len = len;
  return t.record(OpKind::Slice, {a}, at);
}
template <typename T>
NodeId embedding(Tape<T>& t, NodeId table, std::vector<int> ids) {
  Attrs<T> at;
  at.ids = std::move(ids);
  return t.record(OpKind::EmbeddingLookup, {table}, at);
}
template <typename T>
NodeId scalar_mul(Tape<T>& t, NodeId a, T c) {
  Attrs<T> at;
  at.scalar = c;
  return t.record(OpKind::ScalarMul, {a}, at);
}
template <typename T>
NodeId transpose(Tape<T>& t, NodeId a) {
  return t.record(OpKind::Transpose, {a});
}

}  // namespace ad

}  // namespace tatn

#endif
