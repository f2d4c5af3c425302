#pragma once

#include <tuple>
#include <vector>

#include "wsg/tape.hpp"
#include "wsg/text_graph.hpp"

namespace wsg {

/// Binary instance-level targets derived from groundings.
struct PseudoLabels {
  Matrix y_det;     // n_v x c_e
  Matrix y_relsub;  // n_v x c_r
  Matrix y_relobj;  // n_v x c_r
};

struct DetectionHeads {
  Matrix w_det;
  Matrix w_relsub;
  Matrix w_relobj;

  static DetectionHeads init(int d_cnn, int d, std::mt19937_64& rng) {
    return {Matrix::random_normal(d_cnn, d, 0.01, rng),
            Matrix::random_normal(d_cnn, d, 0.01, rng),
            Matrix::random_normal(d_cnn, d, 0.01, rng)};
  }
};

struct DetectionHeadNodes {
  Tape::NodeId w_det;
  Tape::NodeId w_relsub;
  Tape::NodeId w_relobj;
};

/// Y_det[i,j] = 1 iff some entity k has g_entity[k] = i and class j.
/// Y_relsub/Y_relobj analogously over relations via g_relation (the
/// final-iteration grounding).
PseudoLabels extract_pseudo_labels(const TextGraph& graph,
                                   const std::vector<int>& g_entity,
                                   const std::vector<int>& g_relation, int n_v,
                                   int c_e, int c_r);

/// Entity-only variant used inside the refinement loop.
Matrix extract_entity_labels(const std::vector<int>& entities,
                             const std::vector<int>& g, int n_v, int c_e);

struct DetectionScores {
  Tape::NodeId p_det;     // n_v x c_e
  Tape::NodeId p_relsub;  // n_v x c_r
  Tape::NodeId p_relobj;  // n_v x c_r
};

/// P_X = row-softmax(V_feat W_X W'^T) with W' = W_ent for the entity head
/// and W_rel for the two relation heads.
DetectionScores detection_scores(Tape& tape, Tape::NodeId v_feat,
                                 const DetectionHeadNodes& heads,
                                 Tape::NodeId w_ent, Tape::NodeId w_rel);

Tape::NodeId entity_scores(Tape& tape, Tape::NodeId v_feat, Tape::NodeId w_det,
                           Tape::NodeId w_ent);

/// P_rel[i,j,k] = min(P_relsub[i,k], P_relobj[j,k]), scored on demand.
class RelationScoreProvider {
 public:
  RelationScoreProvider(const Matrix& p_relsub, const Matrix& p_relobj)
      : sub_(p_relsub), obj_(p_relobj) {
    if (p_relsub.cols() != p_relobj.cols())
      throw ShapeError("relation score c_r mismatch");
  }
  int num_classes() const { return sub_.cols(); }
  double operator()(int i, int j, int k) const {
    return std::min(sub_.at(i, k), obj_.at(j, k));
  }

 private:
  const Matrix& sub_;
  const Matrix& obj_;
};

/// (L_det, L_relsub, L_relobj): cross-entropy of each prediction against its
/// binary label matrix; all-zero rows contribute 0.
std::tuple<Tape::NodeId, Tape::NodeId, Tape::NodeId> detection_losses(
    Tape& tape, const DetectionScores& scores, const PseudoLabels& labels);

}  // namespace wsg
