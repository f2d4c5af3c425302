#include "wsg/refinement.hpp"

#include "wsg/detection.hpp"

namespace wsg {

RefinedGrounding refine_grounding(const Matrix& p_det,
                                  const std::vector<int>& entities) {
  const int n_v = p_det.rows();
  const int c_e = p_det.cols();
  RefinedGrounding out;
  out.attention = Matrix(static_cast<int>(entities.size()), n_v);
  for (size_t k = 0; k < entities.size(); ++k) {
    if (entities[k] < 0 || entities[k] >= c_e)
      throw ContractError("refine_grounding: entity class out of range");
    for (int j = 0; j < n_v; ++j)
      out.attention.at(static_cast<int>(k), j) = p_det.at(j, entities[k]);
  }
  out.g = argmax_rows(out.attention);
  out.y_det = extract_entity_labels(entities, out.g, n_v, c_e);
  return out;
}

}  // namespace wsg
