#include "wsg/embedding.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

namespace wsg {
namespace {

Matrix hashed_row(const std::string& word, int dim) {
  std::mt19937_64 rng(std::hash<std::string>{}(word) ^ 0x9e3779b97f4a7c15ULL);
  return Matrix::random_normal(1, dim, 1.0, rng);
}

}  // namespace

EmbeddingTable EmbeddingTable::random(const Vocab& vocab, int dim,
                                      uint64_t seed) {
  std::mt19937_64 rng(seed);
  EmbeddingTable t;
  t.dim = dim;
  t.w_ent = Matrix::random_normal(vocab.num_entities(), dim, 1.0, rng);
  t.w_rel = Matrix::random_normal(vocab.num_relations(), dim, 1.0, rng);
  t.attr_rel = Matrix::random_normal(1, dim, 1.0, rng);
  return t;
}

EmbeddingTable EmbeddingTable::load(const std::string& path,
                                    const Vocab& vocab, int dim) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open embedding file: " + path);
  std::unordered_map<std::string, std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (static_cast<int>(v.size()) != dim)
      throw InputError("embedding row for '" + word + "' has " +
                       std::to_string(v.size()) + " values, expected " +
                       std::to_string(dim));
    rows.emplace(std::move(word), std::move(v));
  }

  EmbeddingTable t;
  t.dim = dim;
  auto fill = [&](Matrix& m, const std::vector<std::string>& names) {
    m = Matrix(static_cast<int>(names.size()), dim);
    for (size_t i = 0; i < names.size(); ++i) {
      auto it = rows.find(names[i]);
      if (it != rows.end()) {
        for (int j = 0; j < dim; ++j) m.at(static_cast<int>(i), j) = it->second[j];
      } else {
        Matrix r = hashed_row(names[i], dim);
        for (int j = 0; j < dim; ++j) m.at(static_cast<int>(i), j) = r.at(0, j);
      }
    }
  };
  fill(t.w_ent, vocab.entity_names());
  fill(t.w_rel, vocab.relation_names());
  t.attr_rel = hashed_row("__attr__", dim);
  return t;
}

Matrix EmbeddingTable::oov_row(const std::string& lemma) const {
  return hashed_row(lemma, dim);
}

std::pair<Matrix, Matrix> embed(const TextGraph& graph,
                                const EmbeddingTable& table) {
  Matrix h_ent = gather_rows(table.w_ent, graph.entities);
  std::vector<int> rel_ids;
  rel_ids.reserve(graph.relations.size());
  for (const Relation& r : graph.relations) rel_ids.push_back(r.rel);
  Matrix h_rel = rel_ids.empty() ? Matrix(0, table.dim)
                                 : gather_rows(table.w_rel, rel_ids);
  return {std::move(h_ent), std::move(h_rel)};
}

}  // namespace wsg
