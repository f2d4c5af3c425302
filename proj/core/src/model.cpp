#include "wsg/model.hpp"

#include <cmath>

#include "wsg/phrasal.hpp"
#include "wsg/refinement.hpp"

namespace wsg {

void LossBreakdown::accumulate(const LossBreakdown& other, double w) {
  grd += w * other.grd;
  if (det.size() < other.det.size()) det.resize(other.det.size(), 0.0);
  for (size_t t = 0; t < other.det.size(); ++t) det[t] += w * other.det[t];
  relsub += w * other.relsub;
  relobj += w * other.relobj;
  cssub += w * other.cssub;
  csobj += w * other.csobj;
  cspred += w * other.cspred;
}

Model::Model(const PipelineConfig& cfg, const Vocab& vocab, EmbeddingTable table)
    : cfg_(cfg), vocab_(vocab), table_(std::move(table)) {
  cfg_.validate();
  if (table_.dim != cfg_.dim)
    throw ShapeError("embedding width " + std::to_string(table_.dim) +
                     " != configured d " + std::to_string(cfg_.dim));
  std::mt19937_64 rng(cfg_.seed);
  const int d = cfg_.dim;
  const int dc = cfg_.d_cnn;

  ContextLayers ctx = ContextLayers::init(d, cfg_.phrasal_depth, rng);
  phi_r_w_ = params_.add("phrasal.phi_r.weight", ctx.phi_r_w, true);
  phi_r_b_ = params_.add("phrasal.phi_r.bias", ctx.phi_r_b, false);
  phi_a_w_ = params_.add("phrasal.phi_alpha.weight", ctx.phi_a_w, true);
  phi_a_b_ = params_.add("phrasal.phi_alpha.bias", ctx.phi_a_b, false);

  GroundingHeads gh = GroundingHeads::init(dc, d, rng);
  w_att_ = params_.add("grounding.w_att", gh.w_att, true);
  w_cls_ = params_.add("grounding.w_cls", gh.w_cls, true);

  for (int t = 0; t <= cfg_.refine_iters; ++t)
    w_det_.push_back(params_.add("detection.w_det." + std::to_string(t),
                                 Matrix::random_normal(dc, d, 0.01, rng), true));
  w_relsub_ = params_.add("detection.w_relsub",
                          Matrix::random_normal(dc, d, 0.01, rng), true);
  w_relobj_ = params_.add("detection.w_relobj",
                          Matrix::random_normal(dc, d, 0.01, rng), true);

  RecurrentCore core =
      RecurrentCore::init(cfg_.lstm_hidden, d, dc, cfg_.dropout, rng);
  seq_w_x_ = params_.add("sequential.w_x", core.w_x, true);
  seq_w_h_ = params_.add("sequential.w_h", core.w_h, true);
  seq_b_ = params_.add("sequential.bias", core.b, false);
  seq_start_ = params_.add("sequential.start", core.start, false);
  seq_w_vproj_ = params_.add("sequential.w_vproj", core.w_vproj, true);
  seq_w_out_ = params_.add("sequential.w_out", core.w_out, true);
  seq_b_out_ = params_.add("sequential.b_out", core.b_out, false);
}

RecurrentCore Model::recurrent_core() const {
  RecurrentCore core;
  core.hidden = cfg_.lstm_hidden;
  core.dim = cfg_.dim;
  core.d_cnn = cfg_.d_cnn;
  core.dropout = cfg_.dropout;
  core.w_x = params_.entry(seq_w_x_).value;
  core.w_h = params_.entry(seq_w_h_).value;
  core.b = params_.entry(seq_b_).value;
  core.start = params_.entry(seq_start_).value;
  core.w_vproj = params_.entry(seq_w_vproj_).value;
  core.w_out = params_.entry(seq_w_out_).value;
  core.b_out = params_.entry(seq_b_out_).value;
  return core;
}

TextGraph Model::resolve_graph(const ImageRecord& record,
                               DatasetWarnings* warnings) const {
  if (record.graph.has_value()) return *record.graph;
  TextGraph merged;
  for (const std::string& caption : record.captions) {
    ParseResult res = parse_caption(tokenize(caption), vocab_);
    if (warnings) {
      warnings->dropped_entities += res.dropped_entities;
      warnings->dropped_relations += res.dropped_relations;
    }
    const int base = merged.num_entities();
    for (int e : res.graph.entities) merged.entities.push_back(e);
    for (const Relation& r : res.graph.relations)
      merged.relations.push_back({r.rel, r.subj + base, r.obj + base});
    for (const AttrEdge& a : res.graph.attr_edges)
      merged.attr_edges.push_back({a.attr_node + base, a.head_node + base});
    for (const OovAttribute& a : res.graph.oov_attrs)
      merged.oov_attrs.push_back({a.lemma, a.head_node + base});
  }
  return merged;
}

LossBreakdown Model::train_image(const ImageRecord& record,
                                 const TextGraph& graph, double grad_scale,
                                 std::mt19937_64& rng) {
  LossBreakdown out;
  out.det.assign(static_cast<size_t>(cfg_.refine_iters) + 1, 0.0);
  if (graph.num_entities() == 0) return out;
  graph.validate(vocab_);
  record.proposals.validate();

  Tape tape;
  std::vector<Tape::NodeId> leaves(params_.count());
  for (int i = 0; i < params_.count(); ++i)
    leaves[i] = tape.leaf(params_.entry(i).value, true);
  Tape::NodeId w_ent = tape.leaf(table_.w_ent);
  Tape::NodeId w_rel = tape.leaf(table_.w_rel);
  Tape::NodeId v_feat = tape.leaf(record.proposals.features);

  auto [y_ent, y_rel] = one_hot_labels(graph, vocab_);
  auto [h_ent0_m, h_rel0_m] = embed(graph, table_);
  Tape::NodeId h_ent0 = tape.leaf(h_ent0_m);
  Tape::NodeId h_rel0 = tape.leaf(h_rel0_m);

  // phrasal context
  Tape::NodeId psi = h_ent0;
  if (cfg_.phrasal) {
    ContextLayerNodes ctx{leaves[phi_r_w_], leaves[phi_r_b_], leaves[phi_a_w_],
                          leaves[phi_a_b_]};
    psi = contextualize(tape, graph, h_ent0, h_rel0, ctx, cfg_.phrasal_depth,
                        table_);
  }

  // grounding
  GroundingHeadNodes gh{leaves[w_att_], leaves[w_cls_]};
  GroundingState g_state = ground(tape, psi, v_feat, gh);
  Tape::NodeId l_grd = grounding_loss(tape, g_state, v_feat, gh, w_ent, y_ent);

  const int n_v = record.proposals.count();
  const int c_e = vocab_.num_entities();
  const int c_r = vocab_.num_relations();

  // detection + iterative refinement; pseudo-label targets are constants
  std::vector<Tape::NodeId> det_losses;
  std::vector<int> g_cur = g_state.g;
  Matrix y_det_cur = extract_entity_labels(graph.entities, g_cur, n_v, c_e);
  for (int t = 0; t <= cfg_.refine_iters; ++t) {
    Tape::NodeId p_det =
        entity_scores(tape, v_feat, leaves[w_det_[t]], w_ent);
    det_losses.push_back(tape.cross_entropy_rows(p_det, y_det_cur));
    if (t < cfg_.refine_iters) {
      RefinedGrounding next = refine_grounding(tape.value(p_det), graph.entities);
      g_cur = next.g;
      y_det_cur = std::move(next.y_det);
    }
  }
  const std::vector<int>& g_final = g_cur;  // g^(n_t)

  // relation heads on the final grounding
  PseudoLabels plabels =
      extract_pseudo_labels(graph, g_state.g, g_final, n_v, c_e, c_r);
  Tape::NodeId p_relsub = tape.softmax_rows(
      tape.matmul_nt(tape.matmul(v_feat, leaves[w_relsub_]), w_rel));
  Tape::NodeId p_relobj = tape.softmax_rows(
      tape.matmul_nt(tape.matmul(v_feat, leaves[w_relobj_]), w_rel));
  Tape::NodeId l_relsub = tape.cross_entropy_rows(p_relsub, plabels.y_relsub);
  Tape::NodeId l_relobj = tape.cross_entropy_rows(p_relobj, plabels.y_relobj);

  // sequential context (teacher-forced)
  Tape::NodeId l_cssub = -1, l_csobj = -1, l_cspred = -1;
  if (cfg_.sequential && graph.num_relations() > 0) {
    RecurrentCoreNodes seq{leaves[seq_w_x_],     leaves[seq_w_h_],
                           leaves[seq_b_],       leaves[seq_start_],
                           leaves[seq_w_vproj_], leaves[seq_w_out_],
                           leaves[seq_b_out_]};
    RecurrentCore core_shape = recurrent_core();
    SequentialScores scores =
        sequential_scores(tape, graph, g_final, v_feat, seq, core_shape, w_ent,
                          w_rel, /*training=*/true, rng);
    SequentialLabels slabels = sequential_labels(graph, y_ent, y_rel);
    std::tie(l_cssub, l_csobj, l_cspred) =
        sequential_losses(tape, scores, slabels);
  }

  // Eq.-9-style multi-task total
  Tape::NodeId beta_terms = det_losses[0];
  for (size_t t = 1; t < det_losses.size(); ++t)
    beta_terms = tape.add(beta_terms, det_losses[t]);
  beta_terms = tape.add(beta_terms, l_relsub);
  beta_terms = tape.add(beta_terms, l_relobj);
  if (l_cssub >= 0) {
    beta_terms = tape.add(beta_terms, l_cssub);
    beta_terms = tape.add(beta_terms, l_csobj);
    beta_terms = tape.add(beta_terms, l_cspred);
  }
  Tape::NodeId total = tape.add(l_grd, tape.scale(beta_terms, cfg_.beta));

  const double total_value = tape.value(total).at(0, 0);
  if (!std::isfinite(total_value))
    throw EvalError("non-finite training loss for image " + record.image_id);

  tape.backward(total, grad_scale);
  for (int i = 0; i < params_.count(); ++i) {
    const Matrix& g = tape.grad(leaves[i]);
    if (g.empty()) continue;
    Matrix& dst = params_.entry(i).grad;
    for (size_t k = 0; k < dst.size(); ++k) dst[k] += g[k];
  }

  out.grd = tape.value(l_grd).at(0, 0);
  for (size_t t = 0; t < det_losses.size(); ++t)
    out.det[t] = tape.value(det_losses[t]).at(0, 0);
  out.relsub = tape.value(l_relsub).at(0, 0);
  out.relobj = tape.value(l_relobj).at(0, 0);
  if (l_cssub >= 0) {
    out.cssub = tape.value(l_cssub).at(0, 0);
    out.csobj = tape.value(l_csobj).at(0, 0);
    out.cspred = tape.value(l_cspred).at(0, 0);
  }
  return out;
}

Model::InferenceScores Model::score_image(const ProposalSet& proposals) const {
  proposals.validate();
  const Matrix& v = proposals.features;
  InferenceScores s;
  s.p_det = softmax_rows(
      matmul_nt(matmul(v, params_.entry(w_det_.back()).value), table_.w_ent));
  s.p_relsub = softmax_rows(
      matmul_nt(matmul(v, params_.entry(w_relsub_).value), table_.w_rel));
  s.p_relobj = softmax_rows(
      matmul_nt(matmul(v, params_.entry(w_relobj_).value), table_.w_rel));
  return s;
}

std::vector<FiveTuple> Model::infer_image(const ProposalSet& proposals) const {
  InferenceScores s = score_image(proposals);
  std::vector<Candidate> cands = nms_per_class(s.p_det, proposals.boxes, cfg_.nms);
  if (cands.empty()) return {};
  RelationScoreProvider p_rel(s.p_relsub, s.p_relobj);
  std::vector<FiveTuple> tuples =
      top_k_tuples(s.p_det, p_rel, cands, cfg_.max_k());
  if (cfg_.sequential && !tuples.empty()) {
    tuples = beam_relabel(tuples, proposals, recurrent_core(), table_.w_ent,
                          table_.w_rel, cfg_.beam_width);
    if (static_cast<int>(tuples.size()) > cfg_.max_k())
      tuples.resize(cfg_.max_k());
  }
  return tuples;
}

}  // namespace wsg
