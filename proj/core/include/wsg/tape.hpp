#pragma once

#include <functional>
#include <vector>

#include "wsg/matrix.hpp"

namespace wsg {

/// Reverse-mode differentiation tape. Nodes are appended in topological
/// order during the forward pass; backward() walks them in reverse and
/// accumulates gradients into every node flagged requires_grad.
///
/// Node ids are indices into the tape and stay valid for its lifetime.
/// A tape is built for one forward/backward pair and then discarded.
class Tape {
 public:
  using NodeId = int;

  NodeId leaf(Matrix value, bool requires_grad = false);

  NodeId matmul(NodeId a, NodeId b);
  /// a * b^T
  NodeId matmul_nt(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  /// Broadcast-add a 1xN bias row to every row of a.
  NodeId add_rowvec(NodeId a, NodeId row);
  NodeId scale(NodeId a, double s);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId concat_cols(const std::vector<NodeId>& parts);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  NodeId slice_cols(NodeId a, int start, int len);
  NodeId gather_rows(NodeId a, std::vector<int> idx);
  NodeId transpose(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId tanh(NodeId a);
  NodeId softmax_rows(NodeId a);
  /// Scalar node: -sum y*log(max(p, 1e-12)); y is a constant label matrix.
  NodeId cross_entropy_rows(NodeId p, Matrix y);
  /// Scalar node: sum of all entries.
  NodeId sum(NodeId a);
  /// Inverted dropout with a fixed 0/1 mask scaled by 1/(1-rate).
  NodeId dropout(NodeId a, double rate, std::mt19937_64& rng);

  const Matrix& value(NodeId id) const { return nodes_[id].value; }
  const Matrix& grad(NodeId id) const { return nodes_[id].grad; }
  bool requires_grad(NodeId id) const { return nodes_[id].requires_grad; }
  int size() const { return static_cast<int>(nodes_.size()); }

  /// Seeds the scalar loss node with `seed` and propagates. Throws
  /// ContractError if the loss node is not 1x1.
  void backward(NodeId loss, double seed = 1.0);

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // allocated lazily on first contribution
    bool requires_grad = false;
    std::function<void(Tape&)> backprop;  // empty for leaves
  };

  NodeId push(Matrix value, bool requires_grad,
              std::function<void(Tape&)> backprop);
  void accumulate(NodeId id, const Matrix& g);
  Matrix& grad_ref(NodeId id);

  std::vector<Node> nodes_;
};

}  // namespace wsg
