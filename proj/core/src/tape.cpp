#include "wsg/tape.hpp"

#include <cmath>
#include <utility>

namespace wsg {

Tape::NodeId Tape::push(Matrix value, bool requires_grad,
                        std::function<void(Tape&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Matrix& Tape::grad_ref(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && n.value.size() > 0)
    n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(NodeId id, const Matrix& g) {
  Matrix& dst = grad_ref(id);
  for (size_t k = 0; k < dst.size(); ++k) dst[k] += g[k];
}

Tape::NodeId Tape::leaf(Matrix value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  Matrix v = wsg::matmul(value(a), value(b));
  bool rg = requires_grad(a) || requires_grad(b);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, b, out](Tape& t) {
      const Matrix& g = t.grad(out);
      if (t.requires_grad(a)) t.accumulate(a, wsg::matmul_nt(g, t.value(b)));
      if (t.requires_grad(b)) t.accumulate(b, matmul_tn(t.value(a), g));
    };
  return out;
}

Tape::NodeId Tape::matmul_nt(NodeId a, NodeId b) {
  Matrix v = wsg::matmul_nt(value(a), value(b));
  bool rg = requires_grad(a) || requires_grad(b);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, b, out](Tape& t) {
      const Matrix& g = t.grad(out);
      // y = a b^T: da = g b, db = g^T a
      if (t.requires_grad(a)) t.accumulate(a, wsg::matmul(g, t.value(b)));
      if (t.requires_grad(b)) t.accumulate(b, matmul_tn(g, t.value(a)));
    };
  return out;
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  Matrix v = wsg::add(value(a), value(b));
  bool rg = requires_grad(a) || requires_grad(b);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, b, out](Tape& t) {
      if (t.requires_grad(a)) t.accumulate(a, t.grad(out));
      if (t.requires_grad(b)) t.accumulate(b, t.grad(out));
    };
  return out;
}

Tape::NodeId Tape::add_rowvec(NodeId a, NodeId row) {
  Matrix v = wsg::add_rowvec(value(a), value(row));
  bool rg = requires_grad(a) || requires_grad(row);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, row, out](Tape& t) {
      const Matrix& g = t.grad(out);
      if (t.requires_grad(a)) t.accumulate(a, g);
      if (t.requires_grad(row)) {
        Matrix gr(1, g.cols());
        for (int i = 0; i < g.rows(); ++i)
          for (int j = 0; j < g.cols(); ++j) gr.at(0, j) += g.at(i, j);
        t.accumulate(row, gr);
      }
    };
  return out;
}

Tape::NodeId Tape::scale(NodeId a, double s) {
  Matrix v = wsg::scale(value(a), s);
  bool rg = requires_grad(a);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, s, out](Tape& t) {
      t.accumulate(a, wsg::scale(t.grad(out), s));
    };
  return out;
}

Tape::NodeId Tape::hadamard(NodeId a, NodeId b) {
  Matrix v = wsg::hadamard(value(a), value(b));
  bool rg = requires_grad(a) || requires_grad(b);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, b, out](Tape& t) {
      const Matrix& g = t.grad(out);
      if (t.requires_grad(a)) t.accumulate(a, wsg::hadamard(g, t.value(b)));
      if (t.requires_grad(b)) t.accumulate(b, wsg::hadamard(g, t.value(a)));
    };
  return out;
}

Tape::NodeId Tape::concat_cols(const std::vector<NodeId>& parts) {
  std::vector<const Matrix*> ptrs;
  bool rg = false;
  for (NodeId p : parts) {
    ptrs.push_back(&value(p));
    rg = rg || requires_grad(p);
  }
  Matrix v = wsg::concat_cols(ptrs);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [parts, out](Tape& t) {
      const Matrix& g = t.grad(out);
      int off = 0;
      for (NodeId p : parts) {
        int w = t.value(p).cols();
        if (t.requires_grad(p)) t.accumulate(p, wsg::slice_cols(g, off, w));
        off += w;
      }
    };
  return out;
}

Tape::NodeId Tape::concat_rows(const std::vector<NodeId>& parts) {
  std::vector<const Matrix*> ptrs;
  bool rg = false;
  for (NodeId p : parts) {
    ptrs.push_back(&value(p));
    rg = rg || requires_grad(p);
  }
  Matrix v = wsg::concat_rows(ptrs);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [parts, out](Tape& t) {
      const Matrix& g = t.grad(out);
      int off = 0;
      for (NodeId p : parts) {
        const Matrix& pv = t.value(p);
        if (t.requires_grad(p)) {
          Matrix gp(pv.rows(), pv.cols());
          for (int i = 0; i < pv.rows(); ++i)
            for (int j = 0; j < pv.cols(); ++j) gp.at(i, j) = g.at(off + i, j);
          t.accumulate(p, gp);
        }
        off += pv.rows();
      }
    };
  return out;
}

Tape::NodeId Tape::slice_cols(NodeId a, int start, int len) {
  Matrix v = wsg::slice_cols(value(a), start, len);
  bool rg = requires_grad(a);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, start, len, out](Tape& t) {
      const Matrix& g = t.grad(out);
      Matrix& dst = t.grad_ref(a);
      for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < len; ++j) dst.at(i, start + j) += g.at(i, j);
    };
  return out;
}

Tape::NodeId Tape::gather_rows(NodeId a, std::vector<int> idx) {
  Matrix v = wsg::gather_rows(value(a), idx);
  bool rg = requires_grad(a);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, idx = std::move(idx), out](Tape& t) {
      const Matrix& g = t.grad(out);
      Matrix& dst = t.grad_ref(a);
      for (size_t i = 0; i < idx.size(); ++i)
        for (int j = 0; j < g.cols(); ++j)
          dst.at(idx[i], j) += g.at(static_cast<int>(i), j);
    };
  return out;
}

Tape::NodeId Tape::transpose(NodeId a) {
  Matrix v = wsg::transpose(value(a));
  bool rg = requires_grad(a);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, out](Tape& t) {
      t.accumulate(a, wsg::transpose(t.grad(out)));
    };
  return out;
}

Tape::NodeId Tape::sigmoid(NodeId a) {
  Matrix v = wsg::sigmoid(value(a));
  bool rg = requires_grad(a);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, out](Tape& t) {
      const Matrix& y = t.value(out);
      const Matrix& g = t.grad(out);
      Matrix da(y.rows(), y.cols());
      for (size_t k = 0; k < y.size(); ++k) da[k] = g[k] * y[k] * (1.0 - y[k]);
      t.accumulate(a, da);
    };
  return out;
}

Tape::NodeId Tape::tanh(NodeId a) {
  Matrix v = tanh_elem(value(a));
  bool rg = requires_grad(a);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, out](Tape& t) {
      const Matrix& y = t.value(out);
      const Matrix& g = t.grad(out);
      Matrix da(y.rows(), y.cols());
      for (size_t k = 0; k < y.size(); ++k) da[k] = g[k] * (1.0 - y[k] * y[k]);
      t.accumulate(a, da);
    };
  return out;
}

Tape::NodeId Tape::softmax_rows(NodeId a) {
  Matrix v = wsg::softmax_rows(value(a));
  bool rg = requires_grad(a);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, out](Tape& t) {
      const Matrix& y = t.value(out);
      const Matrix& g = t.grad(out);
      Matrix da(y.rows(), y.cols());
      for (int i = 0; i < y.rows(); ++i) {
        double dot = 0.0;
        for (int j = 0; j < y.cols(); ++j) dot += g.at(i, j) * y.at(i, j);
        for (int j = 0; j < y.cols(); ++j)
          da.at(i, j) = y.at(i, j) * (g.at(i, j) - dot);
      }
      t.accumulate(a, da);
    };
  return out;
}

Tape::NodeId Tape::cross_entropy_rows(NodeId p, Matrix y) {
  double loss = wsg::cross_entropy_rows(value(p), y);
  Matrix v(1, 1);
  v.at(0, 0) = loss;
  bool rg = requires_grad(p);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [p, y = std::move(y), out](Tape& t) {
      const double gs = t.grad(out).at(0, 0);
      const Matrix& pv = t.value(p);
      Matrix dp(pv.rows(), pv.cols());
      for (size_t k = 0; k < pv.size(); ++k) {
        // clamped entries get zero gradient
        if (y[k] != 0.0 && pv[k] > kLogClamp) dp[k] = -gs * y[k] / pv[k];
      }
      t.accumulate(p, dp);
    };
  return out;
}

Tape::NodeId Tape::sum(NodeId a) {
  double s = 0.0;
  const Matrix& av = value(a);
  for (size_t k = 0; k < av.size(); ++k) s += av[k];
  Matrix v(1, 1);
  v.at(0, 0) = s;
  bool rg = requires_grad(a);
  NodeId out = push(std::move(v), rg, nullptr);
  if (rg)
    nodes_[out].backprop = [a, out](Tape& t) {
      const double gs = t.grad(out).at(0, 0);
      const Matrix& av2 = t.value(a);
      Matrix da(av2.rows(), av2.cols(), gs);
      t.accumulate(a, da);
    };
  return out;
}

Tape::NodeId Tape::dropout(NodeId a, double rate, std::mt19937_64& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw ContractError("dropout rate must be < 1");
  const Matrix& av = value(a);
  Matrix mask(av.rows(), av.cols());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep = 1.0 - rate;
  for (size_t k = 0; k < mask.size(); ++k)
    mask[k] = (u(rng) < keep) ? 1.0 / keep : 0.0;
  NodeId m = leaf(std::move(mask), false);
  return hadamard(a, m);
}

void Tape::backward(NodeId loss, double seed) {
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1)
    throw ContractError("backward: loss node is not scalar (" +
                        lv.shape_str() + ")");
  Matrix& g = grad_ref(loss);
  g.at(0, 0) += seed;
  for (NodeId id = loss; id >= 0; --id)
    if (nodes_[id].backprop && !nodes_[id].grad.empty())
      nodes_[id].backprop(*this);
}

}  // namespace wsg
