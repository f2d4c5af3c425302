#pragma once

#include <vector>

#include "wsg/geometry.hpp"
#include "wsg/tape.hpp"

namespace wsg {

/// Region proposals for one image: boxes plus their visual features.
struct ProposalSet {
  std::vector<Box> boxes;
  Matrix features;  // n_v x d_cnn

  int count() const { return static_cast<int>(boxes.size()); }
  void validate() const;
};

/// Attention and classification projections, d_cnn -> d.
struct GroundingHeads {
  Matrix w_att;
  Matrix w_cls;

  static GroundingHeads init(int d_cnn, int d, std::mt19937_64& rng) {
    return {Matrix::random_normal(d_cnn, d, 0.01, rng),
            Matrix::random_normal(d_cnn, d, 0.01, rng)};
  }
};

struct GroundingHeadNodes {
  Tape::NodeId w_att;
  Tape::NodeId w_cls;
};

/// Attention over proposals plus the argmax grounding vector at iteration t.
struct GroundingState {
  Tape::NodeId attention;  // n_e x n_v, rows sum to 1
  std::vector<int> g;      // per-entity proposal index (row argmax)
  int iteration = 0;
};

/// attention = row-softmax(psi * (V_feat W_att)^T); g = per-row argmax with
/// smallest-index tie break.
GroundingState ground(Tape& tape, Tape::NodeId psi, Tape::NodeId v_feat,
                      const GroundingHeadNodes& heads);

/// L_grd: image-level entity classification through the attention.
/// F = A (V_feat W_cls), P_cls = row-softmax(F W_ent^T), cross-entropy vs
/// Y_ent. Returns a scalar node (value 0 for an empty graph).
Tape::NodeId grounding_loss(Tape& tape, const GroundingState& state,
                            Tape::NodeId v_feat, const GroundingHeadNodes& heads,
                            Tape::NodeId w_ent, const Matrix& y_ent);

}  // namespace wsg
