#include "wsg/vocab.hpp"

#include <fstream>

namespace wsg {

Vocab::Vocab(std::vector<std::string> entity_names,
             std::vector<std::string> relation_names)
    : entities_(std::move(entity_names)), relations_(std::move(relation_names)) {
  for (size_t i = 0; i < entities_.size(); ++i) {
    if (!entity_ids_.emplace(entities_[i], static_cast<int>(i)).second)
      throw InputError("duplicate entity class name: " + entities_[i]);
  }
  for (size_t i = 0; i < relations_.size(); ++i) {
    if (!relation_ids_.emplace(relations_[i], static_cast<int>(i)).second)
      throw InputError("duplicate relation class name: " + relations_[i]);
  }
}

std::vector<std::string> Vocab::load_names(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open vocab file: " + path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return names;
}

int Vocab::entity_id(const std::string& name) const {
  auto it = entity_ids_.find(name);
  return it == entity_ids_.end() ? -1 : it->second;
}

int Vocab::relation_id(const std::string& name) const {
  auto it = relation_ids_.find(name);
  return it == relation_ids_.end() ? -1 : it->second;
}

}  // namespace wsg
