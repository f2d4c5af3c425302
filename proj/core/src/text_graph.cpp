#include "wsg/text_graph.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace wsg {

void TextGraph::validate(const Vocab& vocab) const {
  for (int e : entities)
    if (e < 0 || e >= vocab.num_entities())
      throw ContractError("entity class ID out of range");
  for (const Relation& r : relations) {
    if (r.rel < 0 || r.rel >= vocab.num_relations())
      throw ContractError("relation class ID out of range");
    if (r.subj < 0 || r.subj >= num_entities() || r.obj < 0 ||
        r.obj >= num_entities() || r.subj == r.obj)
      throw ContractError("relation endpoint index invalid");
  }
  for (const AttrEdge& a : attr_edges)
    if (a.attr_node < 0 || a.attr_node >= num_entities() || a.head_node < 0 ||
        a.head_node >= num_entities())
      throw ContractError("attribute edge index invalid");
  for (const OovAttribute& a : oov_attrs)
    if (a.head_node < 0 || a.head_node >= num_entities())
      throw ContractError("oov attribute head index invalid");
}

std::vector<std::string> tokenize(const std::string& caption) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : caption) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

namespace {

const std::unordered_set<std::string>& determiners() {
  static const std::unordered_set<std::string> s = {
      "a",    "an",   "the",  "his",  "her",   "its",
      "their", "this", "that", "these", "those", "some"};
  return s;
}

const std::unordered_set<std::string>& prepositions() {
  static const std::unordered_set<std::string> s = {
      "on",     "in",     "at",      "under",  "over",   "above",
      "below",  "behind", "near",    "with",   "by",     "of",
      "beside", "between", "against", "along",  "inside", "across",
      "around", "from",   "to",      "beneath"};
  return s;
}

/// -1 when the token's lemma is not an entity class.
int noun_class(const std::string& w, const Vocab& vocab) {
  int id = vocab.entity_id(w);
  if (id >= 0) return id;
  if (w.size() > 2 && w.ends_with("es"))
    if ((id = vocab.entity_id(w.substr(0, w.size() - 2))) >= 0) return id;
  if (w.size() > 1 && w.back() == 's')
    if ((id = vocab.entity_id(w.substr(0, w.size() - 1))) >= 0) return id;
  return -1;
}

std::vector<std::string> verb_stems(const std::string& w) {
  std::vector<std::string> stems = {w};
  auto push = [&stems](std::string s) {
    if (!s.empty() && std::find(stems.begin(), stems.end(), s) == stems.end())
      stems.push_back(std::move(s));
  };
  if (w.size() > 4 && w.ends_with("ing")) {
    std::string base = w.substr(0, w.size() - 3);
    push(base);
    push(base + "e");
    if (base.size() >= 2 && base[base.size() - 1] == base[base.size() - 2])
      push(base.substr(0, base.size() - 1));
  }
  if (w.size() > 3 && w.ends_with("ed")) {
    push(w.substr(0, w.size() - 2));
    push(w.substr(0, w.size() - 1));
    std::string base = w.substr(0, w.size() - 2);
    if (base.size() >= 2 && base[base.size() - 1] == base[base.size() - 2])
      push(base.substr(0, base.size() - 1));
  }
  if (w.size() > 2 && w.ends_with("es")) push(w.substr(0, w.size() - 2));
  if (w.size() > 1 && w.back() == 's') push(w.substr(0, w.size() - 1));
  return stems;
}

bool looks_verbish(const std::string& w) {
  return w.size() > 4 && (w.ends_with("ing") || w.ends_with("ed"));
}

/// Tries verb(+prep) then verb alone. Returns (class, consumed_prep).
std::pair<int, bool> relation_class(const std::string& w,
                                    const std::string& next,
                                    const Vocab& vocab) {
  const bool next_is_prep = !next.empty() && prepositions().count(next) > 0;
  for (const std::string& stem : verb_stems(w)) {
    if (next_is_prep) {
      int id = vocab.relation_id(stem + "_" + next);
      if (id >= 0) return {id, true};
      id = vocab.relation_id(stem + " " + next);
      if (id >= 0) return {id, true};
    }
    int id = vocab.relation_id(stem);
    if (id >= 0) return {id, false};
  }
  return {-1, false};
}

}  // namespace

ParseResult parse_caption(const std::vector<std::string>& tokens,
                          const Vocab& vocab) {
  ParseResult res;
  TextGraph& g = res.graph;
  std::unordered_map<std::string, int> node_by_lemma;
  std::vector<std::string> adj_buffer;
  int subject = -1;
  int pending_rel = -1;

  auto flush_adjectives_as_dropped = [&]() {
    if (!adj_buffer.empty()) {
      // the last buffered word was an NP head we could not resolve
      ++res.dropped_entities;
      adj_buffer.clear();
    }
  };

  auto entity_node = [&](const std::string& lemma, int cls) {
    auto it = node_by_lemma.find(lemma);
    if (it != node_by_lemma.end()) return it->second;
    g.entities.push_back(cls);
    int idx = g.num_entities() - 1;
    node_by_lemma.emplace(lemma, idx);
    return idx;
  };

  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string& w = tokens[i];
    if (determiners().count(w)) continue;

    int cls = noun_class(w, vocab);
    if (cls >= 0) {
      const std::string lemma = vocab.entity_name(cls);
      int node = entity_node(lemma, cls);
      for (const std::string& adj : adj_buffer) {
        int acls = noun_class(adj, vocab);
        if (acls >= 0) {
          int anode = entity_node(vocab.entity_name(acls), acls);
          if (anode != node) g.attr_edges.push_back({anode, node});
        } else {
          g.oov_attrs.push_back({adj, node});
        }
      }
      adj_buffer.clear();
      if (subject < 0) {
        subject = node;
        if (pending_rel >= 0) {  // dangling relation with no subject
          ++res.dropped_relations;
          pending_rel = -1;
        }
      } else if (pending_rel >= 0) {
        if (node != subject)
          g.relations.push_back({pending_rel, subject, node});
        else
          ++res.dropped_relations;
        pending_rel = -1;
      } else {
        subject = node;  // new clause
      }
      continue;
    }

    const std::string& next = (i + 1 < tokens.size()) ? tokens[i + 1] : "";
    auto [rel, used_prep] = relation_class(w, next, vocab);
    if (rel >= 0) {
      flush_adjectives_as_dropped();
      pending_rel = rel;
      if (used_prep) ++i;
      continue;
    }
    if (prepositions().count(w) || looks_verbish(w)) {
      // relation-shaped but outside the vocab
      flush_adjectives_as_dropped();
      ++res.dropped_relations;
      pending_rel = -1;
      continue;
    }
    adj_buffer.push_back(w);
  }
  flush_adjectives_as_dropped();
  return res;
}

TextGraph build_gt_graph(const std::vector<AnnotatedTriplet>& triplets) {
  if (triplets.empty()) throw InputError("build_gt_graph: empty triplet list");
  for (size_t i = 0; i < triplets.size(); ++i)
    if (!triplets[i].subj_box.valid() || !triplets[i].obj_box.valid())
      throw InputError("build_gt_graph: degenerate box in triplet " +
                       std::to_string(i));

  // one instance per triplet endpoint: 2i = subject, 2i+1 = object
  const int n = static_cast<int>(triplets.size()) * 2;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };

  auto cls_of = [&](int inst) {
    const AnnotatedTriplet& t = triplets[inst / 2];
    return (inst % 2 == 0) ? t.subj_class : t.obj_class;
  };
  auto box_of = [&](int inst) -> const Box& {
    const AnnotatedTriplet& t = triplets[inst / 2];
    return (inst % 2 == 0) ? t.subj_box : t.obj_box;
  };

  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (cls_of(a) == cls_of(b) && iou(box_of(a), box_of(b)) > 0.5)
        unite(a, b);

  TextGraph g;
  std::unordered_map<int, int> node_of_root;
  auto node_of = [&](int inst) {
    int root = find(inst);
    auto it = node_of_root.find(root);
    if (it != node_of_root.end()) return it->second;
    g.entities.push_back(cls_of(inst));
    int idx = g.num_entities() - 1;
    node_of_root.emplace(root, idx);
    return idx;
  };

  for (size_t i = 0; i < triplets.size(); ++i) {
    int s = node_of(static_cast<int>(i) * 2);
    int o = node_of(static_cast<int>(i) * 2 + 1);
    if (s != o) g.relations.push_back({triplets[i].pred_class, s, o});
  }
  return g;
}

std::pair<Matrix, Matrix> one_hot_labels(const TextGraph& graph,
                                         const Vocab& vocab) {
  graph.validate(vocab);
  Matrix y_ent(graph.num_entities(), vocab.num_entities());
  for (int i = 0; i < graph.num_entities(); ++i)
    y_ent.at(i, graph.entities[i]) = 1.0;
  Matrix y_rel(graph.num_relations(), vocab.num_relations());
  for (int i = 0; i < graph.num_relations(); ++i)
    y_rel.at(i, graph.relations[i].rel) = 1.0;
  return {std::move(y_ent), std::move(y_rel)};
}

}  // namespace wsg
