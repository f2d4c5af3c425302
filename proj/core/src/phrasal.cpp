#include "wsg/phrasal.hpp"

namespace wsg {

ContextLayerNodes put_on_tape(Tape& tape, const ContextLayers& layers,
                              bool requires_grad) {
  return ContextLayerNodes{
      tape.leaf(layers.phi_r_w, requires_grad),
      tape.leaf(layers.phi_r_b, requires_grad),
      tape.leaf(layers.phi_a_w, requires_grad),
      tape.leaf(layers.phi_a_b, requires_grad),
  };
}

std::pair<Tape::NodeId, Tape::NodeId> message_pass_step(
    Tape& tape, const std::vector<Edge>& edges, Tape::NodeId h_ent,
    Tape::NodeId h_rel, const ContextLayerNodes& layers) {
  const int n_e = tape.value(h_ent).rows();
  if (edges.empty()) return {h_ent, h_rel};

  std::vector<int> subj_idx, obj_idx;
  subj_idx.reserve(edges.size());
  obj_idx.reserve(edges.size());
  for (const Edge& e : edges) {
    subj_idx.push_back(e.subj);
    obj_idx.push_back(e.obj);
  }

  // [r_i; e_subj; e_obj] per edge row
  Tape::NodeId cat = tape.concat_cols({h_rel, tape.gather_rows(h_ent, subj_idx),
                                       tape.gather_rows(h_ent, obj_idx)});
  Tape::NodeId r_new =
      tape.add_rowvec(tape.matmul_nt(cat, layers.phi_r_w), layers.phi_r_b);
  Tape::NodeId alpha =
      tape.add_rowvec(tape.matmul_nt(cat, layers.phi_a_w), layers.phi_a_b);

  std::vector<Tape::NodeId> out_rows;
  out_rows.reserve(n_e);
  for (int i = 0; i < n_e; ++i) {
    std::vector<int> incoming;
    for (size_t j = 0; j < edges.size(); ++j)
      if (edges[j].obj == i) incoming.push_back(static_cast<int>(j));
    if (incoming.empty()) {
      out_rows.push_back(tape.gather_rows(h_ent, {i}));
      continue;
    }
    Tape::NodeId w = tape.softmax_rows(
        tape.transpose(tape.gather_rows(alpha, incoming)));  // 1 x k
    out_rows.push_back(tape.matmul(w, tape.gather_rows(r_new, incoming)));
  }
  return {tape.concat_rows(out_rows), r_new};
}

Tape::NodeId contextualize(Tape& tape, const TextGraph& graph,
                           Tape::NodeId h_ent0, Tape::NodeId h_rel0,
                           const ContextLayerNodes& layers, int depth,
                           const EmbeddingTable& table) {
  if (depth < 1) throw ContractError("contextualize: depth must be >= 1");
  const int n_e = graph.num_entities();

  // Extend the node matrix with out-of-vocab attribute rows and the edge
  // list with attribute edges (reserved relation embedding per edge).
  std::vector<Edge> edges;
  for (const Relation& r : graph.relations) edges.push_back({r.subj, r.obj});

  Tape::NodeId h_ent = h_ent0;
  Tape::NodeId h_rel = h_rel0;
  const int n_extra =
      static_cast<int>(graph.attr_edges.size() + graph.oov_attrs.size());
  if (n_extra > 0) {
    if (!graph.oov_attrs.empty()) {
      std::vector<const Matrix*> oov_rows;
      std::vector<Matrix> storage;
      storage.reserve(graph.oov_attrs.size());
      for (const OovAttribute& a : graph.oov_attrs)
        storage.push_back(table.oov_row(a.lemma));
      for (const Matrix& m : storage) oov_rows.push_back(&m);
      h_ent = tape.concat_rows({h_ent0, tape.leaf(concat_rows(oov_rows))});
    }
    for (const AttrEdge& a : graph.attr_edges)
      edges.push_back({a.attr_node, a.head_node});
    for (size_t k = 0; k < graph.oov_attrs.size(); ++k)
      edges.push_back({n_e + static_cast<int>(k), graph.oov_attrs[k].head_node});
    Matrix attr_block(n_extra, table.dim);
    for (int i = 0; i < n_extra; ++i)
      for (int j = 0; j < table.dim; ++j)
        attr_block.at(i, j) = table.attr_rel.at(0, j);
    h_rel = graph.relations.empty()
                ? tape.leaf(attr_block)
                : tape.concat_rows({h_rel0, tape.leaf(attr_block)});
  }

  for (int t = 0; t < depth; ++t) {
    auto [e_next, r_next] = message_pass_step(tape, edges, h_ent, h_rel, layers);
    h_ent = e_next;
    h_rel = r_next;
  }

  if (tape.value(h_ent).rows() != n_e) {
    std::vector<int> keep(n_e);
    for (int i = 0; i < n_e; ++i) keep[i] = i;
    h_ent = tape.gather_rows(h_ent, keep);
  }
  return h_ent;
}

}  // namespace wsg
