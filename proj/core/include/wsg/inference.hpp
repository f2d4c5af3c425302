#pragma once

#include <vector>

#include "wsg/detection.hpp"
#include "wsg/geometry.hpp"
#include "wsg/matrix.hpp"

namespace wsg {

/// One scored scene-graph edge candidate.
struct FiveTuple {
  int s_v;  // subject proposal index
  int o_v;  // object proposal index, != s_v
  int s_e;  // subject class
  int p_r;  // predicate class
  int o_e;  // object class
  double score;

  bool same_tuple(const FiveTuple& o) const {
    return s_v == o.s_v && o_v == o.o_v && s_e == o.s_e && p_r == o.p_r &&
           o_e == o.o_e;
  }
};

struct NmsConfig {
  double score_threshold = 0.01;
  double iou_threshold = 0.4;
  int max_per_class = 4;
};

struct Candidate {
  int proposal;
  int cls;
  double score;
};

/// Per-class greedy non-max suppression over the entity detection scores.
std::vector<Candidate> nms_per_class(const Matrix& p_det,
                                     const std::vector<Box>& boxes,
                                     const NmsConfig& cfg);

/// Top-k 5-tuples by summed log-probability over (subject candidate, object
/// candidate, predicate), excluding self-pairs. Ties break lexicographically
/// on (s_v, o_v, s_e, p_r, o_e).
std::vector<FiveTuple> top_k_tuples(const Matrix& p_det,
                                    const RelationScoreProvider& p_rel,
                                    const std::vector<Candidate>& candidates,
                                    int k);

/// Exhaustive-enumeration oracle with identical scoring and tie-breaks.
std::vector<FiveTuple> brute_force_tuples(
    const Matrix& p_det, const Matrix& p_relsub, const Matrix& p_relobj,
    const std::vector<Candidate>& candidates, int k);

}  // namespace wsg
