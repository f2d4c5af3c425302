#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "wsg/matrix.hpp"

namespace wsg {

/// Entity and relation class vocabularies. The index of a name is its class
/// ID (0-based).
class Vocab {
 public:
  Vocab() = default;
  Vocab(std::vector<std::string> entity_names,
        std::vector<std::string> relation_names);

  /// One class name per line; blank lines ignored.
  static std::vector<std::string> load_names(const std::string& path);

  int num_entities() const { return static_cast<int>(entities_.size()); }
  int num_relations() const { return static_cast<int>(relations_.size()); }
  const std::string& entity_name(int id) const { return entities_[id]; }
  const std::string& relation_name(int id) const { return relations_[id]; }
  const std::vector<std::string>& entity_names() const { return entities_; }
  const std::vector<std::string>& relation_names() const { return relations_; }

  /// -1 when absent.
  int entity_id(const std::string& name) const;
  int relation_id(const std::string& name) const;

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, int> entity_ids_;
  std::unordered_map<std::string, int> relation_ids_;
};

}  // namespace wsg
