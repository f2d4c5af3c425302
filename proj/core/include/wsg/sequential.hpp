#pragma once

#include <tuple>
#include <vector>

#include "wsg/grounding.hpp"
#include "wsg/inference.hpp"
#include "wsg/tape.hpp"
#include "wsg/text_graph.hpp"

namespace wsg {

/// LSTM over (subject-region, subject, object-region, object, predicate)
/// sequences. Each step consumes a d-dim word slot concatenated with a
/// d-dim projected-visual slot.
struct RecurrentCore {
  int hidden = 100;
  int dim = 0;      // word/visual slot width d
  int d_cnn = 0;
  double dropout = 0.2;  // training only, applied to the cell output

  Matrix w_x;      // 4h x 2d, gate order i,f,g,o
  Matrix w_h;      // 4h x h
  Matrix b;        // 1 x 4h
  Matrix start;    // 1 x d learned start token
  Matrix w_vproj;  // d_cnn x d visual projection
  Matrix w_out;    // h x d output projection
  Matrix b_out;    // 1 x d

  static RecurrentCore init(int hidden, int dim, int d_cnn, double dropout,
                            std::mt19937_64& rng);
};

struct RecurrentCoreNodes {
  Tape::NodeId w_x, w_h, b, start, w_vproj, w_out, b_out;
};

RecurrentCoreNodes put_on_tape(Tape& tape, const RecurrentCore& core,
                               bool requires_grad);

struct SequentialLabels {
  Matrix y_cssub;   // n_r x c_e
  Matrix y_csobj;   // n_r x c_e
  Matrix y_cspred;  // n_r x c_r
};

/// Row i is the one-hot class of the i-th relation's subject / object /
/// predicate. Y_cspred aliases Y_rel.
SequentialLabels sequential_labels(const TextGraph& graph, const Matrix& y_ent,
                                   const Matrix& y_rel);

// Plain (untracked) forward, used at inference time and by tests.
struct LstmState {
  Matrix h;
  Matrix c;
};

LstmState lstm_step_plain(const RecurrentCore& core, const Matrix& x,
                          const LstmState& prev);

/// Distribution over the output classes: softmax((h w_out + b_out) W'^T).
Matrix step_distribution_plain(const RecurrentCore& core, const Matrix& h,
                               const Matrix& w_embed);

/// Teacher-forced three-step forward for one triplet. Returns
/// (p_sub: 1 x c_e, p_obj: 1 x c_e, p_pred: 1 x c_r).
std::tuple<Matrix, Matrix, Matrix> forward_triplet(
    const Matrix& v_sub, const Matrix& v_obj, int subj_class, int obj_class,
    const RecurrentCore& core, const Matrix& w_ent, const Matrix& w_rel);

/// Tape-tracked teacher-forced forward over all relations of a graph,
/// batched row-wise. Returns (P_cssub, P_csobj, P_cspred) nodes; all empty
/// (0-row) when the graph has no relations.
struct SequentialScores {
  Tape::NodeId p_cssub;
  Tape::NodeId p_csobj;
  Tape::NodeId p_cspred;
  int rows = 0;
};

SequentialScores sequential_scores(Tape& tape, const TextGraph& graph,
                                   const std::vector<int>& g,
                                   Tape::NodeId v_feat,
                                   const RecurrentCoreNodes& nodes,
                                   const RecurrentCore& core, Tape::NodeId w_ent,
                                   Tape::NodeId w_rel, bool training,
                                   std::mt19937_64& rng);

/// (L_cssub, L_csobj, L_cspred) as scalar tape nodes.
std::tuple<Tape::NodeId, Tape::NodeId, Tape::NodeId> sequential_losses(
    Tape& tape, const SequentialScores& scores, const SequentialLabels& labels);

/// Beam-search relabeling of candidate tuples. For each candidate's region
/// pair, searches subject class, then object class, then predicate class at
/// the given width; completed sequences from all candidates are merged,
/// sorted descending by summed log-probability (ties: lower candidate index,
/// then lexicographic class IDs) and deduplicated on the full 5-tuple.
std::vector<FiveTuple> beam_relabel(const std::vector<FiveTuple>& candidates,
                                    const ProposalSet& proposals,
                                    const RecurrentCore& core,
                                    const Matrix& w_ent, const Matrix& w_rel,
                                    int beam_width);

}  // namespace wsg
