#include "wsg/detection.hpp"

namespace wsg {

Matrix extract_entity_labels(const std::vector<int>& entities,
                             const std::vector<int>& g, int n_v, int c_e) {
  if (g.size() != entities.size())
    throw ContractError("grounding vector length != entity count");
  Matrix y(n_v, c_e);
  for (size_t k = 0; k < entities.size(); ++k) {
    if (g[k] < 0 || g[k] >= n_v)
      throw ContractError("grounding index out of range");
    y.at(g[k], entities[k]) = 1.0;
  }
  return y;
}

PseudoLabels extract_pseudo_labels(const TextGraph& graph,
                                   const std::vector<int>& g_entity,
                                   const std::vector<int>& g_relation, int n_v,
                                   int c_e, int c_r) {
  PseudoLabels out;
  out.y_det = extract_entity_labels(graph.entities, g_entity, n_v, c_e);
  out.y_relsub = Matrix(n_v, c_r);
  out.y_relobj = Matrix(n_v, c_r);
  for (const Relation& r : graph.relations) {
    out.y_relsub.at(g_relation[r.subj], r.rel) = 1.0;
    out.y_relobj.at(g_relation[r.obj], r.rel) = 1.0;
  }
  return out;
}

Tape::NodeId entity_scores(Tape& tape, Tape::NodeId v_feat, Tape::NodeId w_det,
                           Tape::NodeId w_ent) {
  return tape.softmax_rows(
      tape.matmul_nt(tape.matmul(v_feat, w_det), w_ent));
}

DetectionScores detection_scores(Tape& tape, Tape::NodeId v_feat,
                                 const DetectionHeadNodes& heads,
                                 Tape::NodeId w_ent, Tape::NodeId w_rel) {
  DetectionScores s;
  s.p_det = entity_scores(tape, v_feat, heads.w_det, w_ent);
  s.p_relsub = tape.softmax_rows(
      tape.matmul_nt(tape.matmul(v_feat, heads.w_relsub), w_rel));
  s.p_relobj = tape.softmax_rows(
      tape.matmul_nt(tape.matmul(v_feat, heads.w_relobj), w_rel));
  return s;
}

std::tuple<Tape::NodeId, Tape::NodeId, Tape::NodeId> detection_losses(
    Tape& tape, const DetectionScores& scores, const PseudoLabels& labels) {
  return {tape.cross_entropy_rows(scores.p_det, labels.y_det),
          tape.cross_entropy_rows(scores.p_relsub, labels.y_relsub),
          tape.cross_entropy_rows(scores.p_relobj, labels.y_relobj)};
}

}  // namespace wsg
