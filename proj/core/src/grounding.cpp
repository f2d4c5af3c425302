#include "wsg/grounding.hpp"

namespace wsg {

void ProposalSet::validate() const {
  if (count() < 1) throw InputError("proposal set is empty");
  if (features.rows() != count())
    throw ShapeError("feature rows " + std::to_string(features.rows()) +
                     " != box count " + std::to_string(count()));
  for (const Box& b : boxes)
    if (!b.valid()) throw InputError("proposal box has non-positive area");
  if (!features.all_finite())
    throw InputError("proposal features contain non-finite values");
}

GroundingState ground(Tape& tape, Tape::NodeId psi, Tape::NodeId v_feat,
                      const GroundingHeadNodes& heads) {
  Tape::NodeId h_att = tape.matmul(v_feat, heads.w_att);
  Tape::NodeId d_dot = tape.matmul_nt(psi, h_att);
  Tape::NodeId attention = tape.softmax_rows(d_dot);
  GroundingState s;
  s.attention = attention;
  s.g = argmax_rows(tape.value(attention));
  s.iteration = 0;
  return s;
}

Tape::NodeId grounding_loss(Tape& tape, const GroundingState& state,
                            Tape::NodeId v_feat, const GroundingHeadNodes& heads,
                            Tape::NodeId w_ent, const Matrix& y_ent) {
  if (y_ent.rows() == 0) return tape.leaf(Matrix(1, 1), false);
  Tape::NodeId h_cls = tape.matmul(v_feat, heads.w_cls);
  Tape::NodeId f = tape.matmul(state.attention, h_cls);
  Tape::NodeId f_prime = tape.matmul_nt(f, w_ent);
  Tape::NodeId p_cls = tape.softmax_rows(f_prime);
  return tape.cross_entropy_rows(p_cls, y_ent);
}

}  // namespace wsg
