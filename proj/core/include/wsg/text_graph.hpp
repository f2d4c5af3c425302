#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wsg/geometry.hpp"
#include "wsg/matrix.hpp"
#include "wsg/vocab.hpp"

namespace wsg {

struct Relation {
  int rel;   // relation class ID, < c_r
  int subj;  // entity index
  int obj;   // entity index, != subj
};

/// Attribute edge between two in-vocab entity nodes. Uses the reserved
/// relation slot (class c_r) during message passing; never enters labels.
struct AttrEdge {
  int attr_node;
  int head_node;
};

/// Attribute whose lemma is outside the entity vocab. Participates in
/// message passing as an extra node but is excluded from grounding and
/// pseudo-labels.
struct OovAttribute {
  std::string lemma;
  int head_node;
};

struct TextGraph {
  std::vector<int> entities;  // class IDs
  std::vector<Relation> relations;
  std::vector<AttrEdge> attr_edges;
  std::vector<OovAttribute> oov_attrs;

  int num_entities() const { return static_cast<int>(entities.size()); }
  int num_relations() const { return static_cast<int>(relations.size()); }
  void validate(const Vocab& vocab) const;
};

struct ParseResult {
  TextGraph graph;
  int dropped_entities = 0;
  int dropped_relations = 0;
};

/// Lowercases, strips punctuation, splits on whitespace.
std::vector<std::string> tokenize(const std::string& caption);

/// Single-pass pattern extraction over a simplified declarative grammar:
/// NP := det? adj* noun, REL := verb(+prep)? | prep, clause := NP REL NP.
/// Nouns map to entity nodes (duplicates within one caption merge by lemma),
/// REL tokens to relation edges, adjectives to attribute nodes. Out-of-vocab
/// nouns and relations are dropped and counted.
ParseResult parse_caption(const std::vector<std::string>& tokens,
                          const Vocab& vocab);

struct AnnotatedTriplet {
  int subj_class;
  int pred_class;
  int obj_class;
  Box subj_box;
  Box obj_box;
};

/// Merges same-class instances with pairwise IoU > 0.5 into single entity
/// nodes (transitively, via union-find) and re-indexes the relations onto
/// the merged nodes. Boxes are discarded: the output is image-level only.
TextGraph build_gt_graph(const std::vector<AnnotatedTriplet>& triplets);

/// (Y_ent: n_e x c_e, Y_rel: n_r x c_r), one-hot rows.
std::pair<Matrix, Matrix> one_hot_labels(const TextGraph& graph,
                                         const Vocab& vocab);

}  // namespace wsg
