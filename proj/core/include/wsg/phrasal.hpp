#pragma once

#include <utility>
#include <vector>

#include "wsg/embedding.hpp"
#include "wsg/tape.hpp"
#include "wsg/text_graph.hpp"

namespace wsg {

/// Weights of the two linear edge layers: phi_r (3d -> d, edge update) and
/// phi_alpha (3d -> 1, edge weight). Stack depth applies in contextualize().
struct ContextLayers {
  Matrix phi_r_w;  // d x 3d
  Matrix phi_r_b;  // 1 x d
  Matrix phi_a_w;  // 1 x 3d
  Matrix phi_a_b;  // 1 x 1
  int depth = 2;

  static ContextLayers init(int d, int depth, std::mt19937_64& rng) {
    ContextLayers l;
    l.phi_r_w = Matrix::random_normal(d, 3 * d, 0.01, rng);
    l.phi_r_b = Matrix(1, d);
    l.phi_a_w = Matrix::random_normal(1, 3 * d, 0.01, rng);
    l.phi_a_b = Matrix(1, 1);
    l.depth = depth;
    return l;
  }
};

/// Tape node ids of the layer parameters; the caller decides which are
/// trainable leaves.
struct ContextLayerNodes {
  Tape::NodeId phi_r_w;
  Tape::NodeId phi_r_b;
  Tape::NodeId phi_a_w;
  Tape::NodeId phi_a_b;
};

ContextLayerNodes put_on_tape(Tape& tape, const ContextLayers& layers,
                              bool requires_grad);

/// Directed edge over rows of the entity matrix; edge i pairs with row i of
/// the relation matrix.
struct Edge {
  int subj;
  int obj;
};

/// One round of edge-then-node updates:
///   r'_i = phi_r([r_i; e_subj; e_obj]),  alpha_i = phi_alpha(same input),
///   e'_i = softmax-weighted sum of incoming r' (entities with no incoming
///   edge keep their input row).
/// Returns (updated entities, updated relations).
std::pair<Tape::NodeId, Tape::NodeId> message_pass_step(
    Tape& tape, const std::vector<Edge>& edges, Tape::NodeId h_ent,
    Tape::NodeId h_rel, const ContextLayerNodes& layers);

/// Applies message_pass_step `depth` times over the graph's relation edges,
/// attribute edges, and out-of-vocab attribute nodes, then returns the final
/// entity matrix restricted to the graph's real entity rows (n_e x d).
Tape::NodeId contextualize(Tape& tape, const TextGraph& graph,
                           Tape::NodeId h_ent0, Tape::NodeId h_rel0,
                           const ContextLayerNodes& layers, int depth,
                           const EmbeddingTable& table);

}  // namespace wsg
