#pragma once

#include <vector>

#include "wsg/matrix.hpp"

namespace wsg {

/// Result of one bootstrap round: attention re-derived from the detector's
/// own scores.
struct RefinedGrounding {
  Matrix attention;    // n_e x n_v; rows are raw column selections, in [0,1]
  std::vector<int> g;  // per-entity argmax, smallest-index tie break
  Matrix y_det;        // n_v x c_e rebuilt from (g, entities)
};

/// Row k of the new attention is column entities[k] of p_det (transposed
/// selection). Rows are not re-normalized; only the argmax feeds downstream.
RefinedGrounding refine_grounding(const Matrix& p_det,
                                  const std::vector<int>& entities);

}  // namespace wsg
