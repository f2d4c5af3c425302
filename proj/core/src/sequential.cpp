#include "wsg/sequential.hpp"

#include <algorithm>
#include <cmath>

namespace wsg {
namespace {

double clamped_log(double p) { return std::log(std::max(p, kLogClamp)); }

}  // namespace

RecurrentCore RecurrentCore::init(int hidden, int dim, int d_cnn,
                                  double dropout, std::mt19937_64& rng) {
  RecurrentCore c;
  c.hidden = hidden;
  c.dim = dim;
  c.d_cnn = d_cnn;
  c.dropout = dropout;
  c.w_x = Matrix::random_normal(4 * hidden, 2 * dim, 0.01, rng);
  c.w_h = Matrix::random_normal(4 * hidden, hidden, 0.01, rng);
  c.b = Matrix(1, 4 * hidden);
  c.start = Matrix::random_normal(1, dim, 0.01, rng);
  c.w_vproj = Matrix::random_normal(d_cnn, dim, 0.01, rng);
  c.w_out = Matrix::random_normal(hidden, dim, 0.01, rng);
  c.b_out = Matrix(1, dim);
  return c;
}

RecurrentCoreNodes put_on_tape(Tape& tape, const RecurrentCore& core,
                               bool requires_grad) {
  return RecurrentCoreNodes{
      tape.leaf(core.w_x, requires_grad),   tape.leaf(core.w_h, requires_grad),
      tape.leaf(core.b, requires_grad),     tape.leaf(core.start, requires_grad),
      tape.leaf(core.w_vproj, requires_grad),
      tape.leaf(core.w_out, requires_grad), tape.leaf(core.b_out, requires_grad),
  };
}

SequentialLabels sequential_labels(const TextGraph& graph, const Matrix& y_ent,
                                   const Matrix& y_rel) {
  std::vector<int> subj, obj;
  for (const Relation& r : graph.relations) {
    subj.push_back(r.subj);
    obj.push_back(r.obj);
  }
  SequentialLabels out;
  out.y_cssub = subj.empty() ? Matrix(0, y_ent.cols())
                             : gather_rows(y_ent, subj);
  out.y_csobj = obj.empty() ? Matrix(0, y_ent.cols()) : gather_rows(y_ent, obj);
  out.y_cspred = y_rel;
  return out;
}

LstmState lstm_step_plain(const RecurrentCore& core, const Matrix& x,
                          const LstmState& prev) {
  const int h = core.hidden;
  Matrix gates = add_rowvec(
      add(matmul_nt(x, core.w_x), matmul_nt(prev.h, core.w_h)), core.b);
  Matrix gi = sigmoid(slice_cols(gates, 0, h));
  Matrix gf = sigmoid(slice_cols(gates, h, h));
  Matrix gg = tanh_elem(slice_cols(gates, 2 * h, h));
  Matrix go = sigmoid(slice_cols(gates, 3 * h, h));
  LstmState next;
  next.c = add(hadamard(gf, prev.c), hadamard(gi, gg));
  next.h = hadamard(go, tanh_elem(next.c));
  return next;
}

Matrix step_distribution_plain(const RecurrentCore& core, const Matrix& h,
                               const Matrix& w_embed) {
  Matrix out = add_rowvec(matmul(h, core.w_out), core.b_out);
  return softmax_rows(matmul_nt(out, w_embed));
}

std::tuple<Matrix, Matrix, Matrix> forward_triplet(
    const Matrix& v_sub, const Matrix& v_obj, int subj_class, int obj_class,
    const RecurrentCore& core, const Matrix& w_ent, const Matrix& w_rel) {
  if (subj_class < 0 || subj_class >= w_ent.rows() || obj_class < 0 ||
      obj_class >= w_ent.rows())
    throw ContractError("forward_triplet: class out of range");
  LstmState st{Matrix(1, core.hidden), Matrix(1, core.hidden)};

  Matrix vproj_sub = matmul(v_sub, core.w_vproj);
  Matrix x1 = concat_cols({&core.start, &vproj_sub});
  st = lstm_step_plain(core, x1, st);
  Matrix p_sub = step_distribution_plain(core, st.h, w_ent);

  Matrix e_sub = gather_rows(w_ent, {subj_class});
  Matrix vproj_obj = matmul(v_obj, core.w_vproj);
  Matrix x2 = concat_cols({&e_sub, &vproj_obj});
  st = lstm_step_plain(core, x2, st);
  Matrix p_obj = step_distribution_plain(core, st.h, w_ent);

  Matrix e_obj = gather_rows(w_ent, {obj_class});
  Matrix zero_vis(1, core.dim);
  Matrix x3 = concat_cols({&e_obj, &zero_vis});
  st = lstm_step_plain(core, x3, st);
  Matrix p_pred = step_distribution_plain(core, st.h, w_rel);

  return {std::move(p_sub), std::move(p_obj), std::move(p_pred)};
}

namespace {

struct TapeLstmState {
  Tape::NodeId h;
  Tape::NodeId c;
};

TapeLstmState lstm_step_tape(Tape& tape, const RecurrentCoreNodes& n, int hidden,
                             Tape::NodeId x, const TapeLstmState& prev) {
  Tape::NodeId gates = tape.add_rowvec(
      tape.add(tape.matmul_nt(x, n.w_x), tape.matmul_nt(prev.h, n.w_h)), n.b);
  Tape::NodeId gi = tape.sigmoid(tape.slice_cols(gates, 0, hidden));
  Tape::NodeId gf = tape.sigmoid(tape.slice_cols(gates, hidden, hidden));
  Tape::NodeId gg = tape.tanh(tape.slice_cols(gates, 2 * hidden, hidden));
  Tape::NodeId go = tape.sigmoid(tape.slice_cols(gates, 3 * hidden, hidden));
  TapeLstmState next;
  next.c = tape.add(tape.hadamard(gf, prev.c), tape.hadamard(gi, gg));
  next.h = tape.hadamard(go, tape.tanh(next.c));
  return next;
}

Tape::NodeId step_distribution_tape(Tape& tape, const RecurrentCoreNodes& n,
                                    const RecurrentCore& core, Tape::NodeId h,
                                    Tape::NodeId w_embed, bool training,
                                    std::mt19937_64& rng) {
  Tape::NodeId dropped =
      training ? tape.dropout(h, core.dropout, rng) : h;
  Tape::NodeId out =
      tape.add_rowvec(tape.matmul(dropped, n.w_out), n.b_out);
  return tape.softmax_rows(tape.matmul_nt(out, w_embed));
}

Tape::NodeId repeat_row(Tape& tape, Tape::NodeId row, int n) {
  std::vector<int> idx(n, 0);
  return tape.gather_rows(row, idx);
}

}  // namespace

SequentialScores sequential_scores(Tape& tape, const TextGraph& graph,
                                   const std::vector<int>& g,
                                   Tape::NodeId v_feat,
                                   const RecurrentCoreNodes& nodes,
                                   const RecurrentCore& core, Tape::NodeId w_ent,
                                   Tape::NodeId w_rel, bool training,
                                   std::mt19937_64& rng) {
  SequentialScores out;
  out.rows = graph.num_relations();
  if (out.rows == 0) {
    const int c_e = tape.value(w_ent).rows();
    const int c_r = tape.value(w_rel).rows();
    out.p_cssub = tape.leaf(Matrix(0, c_e));
    out.p_csobj = tape.leaf(Matrix(0, c_e));
    out.p_cspred = tape.leaf(Matrix(0, c_r));
    return out;
  }
  const int n_r = out.rows;
  std::vector<int> sub_props, obj_props, sub_cls, obj_cls;
  for (const Relation& r : graph.relations) {
    sub_props.push_back(g[r.subj]);
    obj_props.push_back(g[r.obj]);
    sub_cls.push_back(graph.entities[r.subj]);
    obj_cls.push_back(graph.entities[r.obj]);
  }

  TapeLstmState st{tape.leaf(Matrix(n_r, core.hidden)),
                   tape.leaf(Matrix(n_r, core.hidden))};

  // step 1: start token + projected subject region
  Tape::NodeId v_sub =
      tape.matmul(tape.gather_rows(v_feat, sub_props), nodes.w_vproj);
  Tape::NodeId x1 =
      tape.concat_cols({repeat_row(tape, nodes.start, n_r), v_sub});
  st = lstm_step_tape(tape, nodes, core.hidden, x1, st);
  out.p_cssub =
      step_distribution_tape(tape, nodes, core, st.h, w_ent, training, rng);

  // step 2: true subject word + projected object region
  Tape::NodeId v_obj =
      tape.matmul(tape.gather_rows(v_feat, obj_props), nodes.w_vproj);
  Tape::NodeId x2 = tape.concat_cols({tape.gather_rows(w_ent, sub_cls), v_obj});
  st = lstm_step_tape(tape, nodes, core.hidden, x2, st);
  out.p_csobj =
      step_distribution_tape(tape, nodes, core, st.h, w_ent, training, rng);

  // step 3: true object word + dummy (zero) visual slot
  Tape::NodeId zeros = tape.leaf(Matrix(n_r, core.dim));
  Tape::NodeId x3 = tape.concat_cols({tape.gather_rows(w_ent, obj_cls), zeros});
  st = lstm_step_tape(tape, nodes, core.hidden, x3, st);
  out.p_cspred =
      step_distribution_tape(tape, nodes, core, st.h, w_rel, training, rng);
  return out;
}

std::tuple<Tape::NodeId, Tape::NodeId, Tape::NodeId> sequential_losses(
    Tape& tape, const SequentialScores& scores, const SequentialLabels& labels) {
  return {tape.cross_entropy_rows(scores.p_cssub, labels.y_cssub),
          tape.cross_entropy_rows(scores.p_csobj, labels.y_csobj),
          tape.cross_entropy_rows(scores.p_cspred, labels.y_cspred)};
}

namespace {

struct BeamItem {
  int s_e = -1;
  int o_e = -1;
  int p_r = -1;
  double score = 0.0;
  LstmState state;
};

bool beam_item_less(const BeamItem& a, const BeamItem& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.s_e != b.s_e) return a.s_e < b.s_e;
  if (a.o_e != b.o_e) return a.o_e < b.o_e;
  return a.p_r < b.p_r;
}

void prune(std::vector<BeamItem>& beam, int width) {
  std::stable_sort(beam.begin(), beam.end(), beam_item_less);
  if (static_cast<int>(beam.size()) > width) beam.resize(width);
}

}  // namespace

std::vector<FiveTuple> beam_relabel(const std::vector<FiveTuple>& candidates,
                                    const ProposalSet& proposals,
                                    const RecurrentCore& core,
                                    const Matrix& w_ent, const Matrix& w_rel,
                                    int beam_width) {
  if (beam_width < 1) throw ContractError("beam_relabel: width must be >= 1");
  if (candidates.empty()) return {};
  const int c_e = w_ent.rows();
  const int c_r = w_rel.rows();

  struct Scored {
    FiveTuple tuple;
    int candidate_index;
  };
  std::vector<Scored> merged;

  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    const FiveTuple& cand = candidates[ci];
    Matrix v_sub = gather_rows(proposals.features, {cand.s_v});
    Matrix v_obj = gather_rows(proposals.features, {cand.o_v});
    Matrix vproj_sub = matmul(v_sub, core.w_vproj);
    Matrix vproj_obj = matmul(v_obj, core.w_vproj);

    // step 1: subject class
    LstmState st0{Matrix(1, core.hidden), Matrix(1, core.hidden)};
    Matrix x1 = concat_cols({&core.start, &vproj_sub});
    LstmState st1 = lstm_step_plain(core, x1, st0);
    Matrix p_sub = step_distribution_plain(core, st1.h, w_ent);
    std::vector<BeamItem> beam;
    for (int s = 0; s < c_e; ++s)
      beam.push_back({s, -1, -1, clamped_log(p_sub.at(0, s)), st1});
    prune(beam, beam_width);

    // step 2: object class
    std::vector<BeamItem> next;
    for (const BeamItem& item : beam) {
      Matrix e_sub = gather_rows(w_ent, {item.s_e});
      Matrix x2 = concat_cols({&e_sub, &vproj_obj});
      LstmState st2 = lstm_step_plain(core, x2, item.state);
      Matrix p_obj = step_distribution_plain(core, st2.h, w_ent);
      for (int o = 0; o < c_e; ++o)
        next.push_back({item.s_e, o, -1,
                        item.score + clamped_log(p_obj.at(0, o)), st2});
    }
    prune(next, beam_width);

    // step 3: predicate class
    std::vector<BeamItem> done;
    Matrix zero_vis(1, core.dim);
    for (const BeamItem& item : next) {
      Matrix e_obj = gather_rows(w_ent, {item.o_e});
      Matrix x3 = concat_cols({&e_obj, &zero_vis});
      LstmState st3 = lstm_step_plain(core, x3, item.state);
      Matrix p_pred = step_distribution_plain(core, st3.h, w_rel);
      for (int r = 0; r < c_r; ++r)
        done.push_back({item.s_e, item.o_e, r,
                        item.score + clamped_log(p_pred.at(0, r)), LstmState{}});
    }
    prune(done, beam_width);

    for (const BeamItem& item : done)
      merged.push_back({{cand.s_v, cand.o_v, item.s_e, item.p_r, item.o_e,
                         item.score},
                        static_cast<int>(ci)});
  }

  std::stable_sort(merged.begin(), merged.end(),
                   [](const Scored& a, const Scored& b) {
                     if (a.tuple.score != b.tuple.score)
                       return a.tuple.score > b.tuple.score;
                     if (a.candidate_index != b.candidate_index)
                       return a.candidate_index < b.candidate_index;
                     if (a.tuple.s_e != b.tuple.s_e) return a.tuple.s_e < b.tuple.s_e;
                     if (a.tuple.o_e != b.tuple.o_e) return a.tuple.o_e < b.tuple.o_e;
                     return a.tuple.p_r < b.tuple.p_r;
                   });
  std::vector<FiveTuple> out;
  for (const Scored& s : merged) {
    bool dup = false;
    for (const FiveTuple& u : out)
      if (u.same_tuple(s.tuple)) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(s.tuple);
  }
  return out;
}

}  // namespace wsg
