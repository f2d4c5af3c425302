#pragma once

#include <random>
#include <vector>

#include "wsg/adam.hpp"
#include "wsg/config.hpp"
#include "wsg/dataset.hpp"
#include "wsg/embedding.hpp"
#include "wsg/sequential.hpp"

namespace wsg {

/// Per-image loss components (Eq.-style breakdown of the multi-task loss).
struct LossBreakdown {
  double grd = 0.0;
  std::vector<double> det;  // one term per refinement head
  double relsub = 0.0;
  double relobj = 0.0;
  double cssub = 0.0;
  double csobj = 0.0;
  double cspred = 0.0;

  double det_sum() const {
    double s = 0.0;
    for (double d : det) s += d;
    return s;
  }
  double total(double beta) const {
    return grd + beta * (det_sum() + relsub + relobj + cssub + csobj + cspred);
  }
  void accumulate(const LossBreakdown& other, double w);
};

/// The full learned pipeline: phrasal context layers, grounding heads,
/// per-iteration detection heads, relation heads, and the recurrent core.
/// Parameters live in a ParamStore in fixed registration order; frozen
/// embeddings are held separately and never updated.
class Model {
 public:
  Model(const PipelineConfig& cfg, const Vocab& vocab, EmbeddingTable table);

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const PipelineConfig& config() const { return cfg_; }
  const Vocab& vocab() const { return vocab_; }
  const EmbeddingTable& embeddings() const { return table_; }

  /// Builds the training tape for one image, runs backward seeded with
  /// `grad_scale`, and accumulates parameter gradients. Returns the
  /// (unscaled) loss breakdown. Graph must be nonempty.
  LossBreakdown train_image(const ImageRecord& record, const TextGraph& graph,
                            double grad_scale, std::mt19937_64& rng);

  /// Caption-free detection scores for one image (last refinement head).
  struct InferenceScores {
    Matrix p_det;
    Matrix p_relsub;
    Matrix p_relobj;
  };
  InferenceScores score_image(const ProposalSet& proposals) const;

  /// Full test-time path: detection scores -> per-class NMS -> top-K tuple
  /// search -> (optionally) beam-search relabeling.
  std::vector<FiveTuple> infer_image(const ProposalSet& proposals) const;

  /// Resolves the training text graph for a record: the pre-parsed graph if
  /// present, otherwise the union of parsed captions.
  TextGraph resolve_graph(const ImageRecord& record,
                          DatasetWarnings* warnings = nullptr) const;

  RecurrentCore recurrent_core() const;

 private:
  PipelineConfig cfg_;
  Vocab vocab_;
  EmbeddingTable table_;
  ParamStore params_;

  // parameter indices, in registration order
  int phi_r_w_, phi_r_b_, phi_a_w_, phi_a_b_;
  int w_att_, w_cls_;
  std::vector<int> w_det_;  // one per refinement iteration t = 0..n_t
  int w_relsub_, w_relobj_;
  int seq_w_x_, seq_w_h_, seq_b_, seq_start_, seq_w_vproj_, seq_w_out_,
      seq_b_out_;
};

}  // namespace wsg
