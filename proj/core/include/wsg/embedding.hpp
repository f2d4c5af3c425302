#pragma once

#include <string>
#include <utility>

#include "wsg/matrix.hpp"
#include "wsg/text_graph.hpp"
#include "wsg/vocab.hpp"

namespace wsg {

/// Frozen word embeddings for entity and relation classes. Never receives
/// gradient updates. Also carries a reserved embedding row for the attribute
/// relation used during message passing.
struct EmbeddingTable {
  Matrix w_ent;   // c_e x d
  Matrix w_rel;   // c_r x d
  Matrix attr_rel;  // 1 x d, reserved "attr" relation class
  int dim = 0;

  /// Seeded unit-variance random table.
  static EmbeddingTable random(const Vocab& vocab, int dim, uint64_t seed);

  /// Loads "word v1 ... vd" lines. Classes missing from the file fall back
  /// to a lemma-hash-seeded random row.
  static EmbeddingTable load(const std::string& path, const Vocab& vocab,
                             int dim);

  /// Deterministic unit-variance row for an out-of-vocab lemma.
  Matrix oov_row(const std::string& lemma) const;
};

/// H_ent0 = Y_ent * W_ent, H_rel0 = Y_rel * W_rel.
std::pair<Matrix, Matrix> embed(const TextGraph& graph,
                                const EmbeddingTable& table);

}  // namespace wsg
