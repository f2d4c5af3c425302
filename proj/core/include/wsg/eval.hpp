#pragma once

#include <map>
#include <string>
#include <vector>

#include "wsg/geometry.hpp"
#include "wsg/inference.hpp"
#include "wsg/text_graph.hpp"
#include "wsg/vocab.hpp"

namespace wsg {

struct GroundTruthTriplet {
  Box subj_box;
  Box obj_box;
  int s_e;
  int p_r;
  int o_e;
};

/// Prediction with its proposal indices resolved to boxes.
struct ResolvedPrediction {
  FiveTuple tuple;
  Box subj_box;
  Box obj_box;
};

/// Fraction of ground-truth triplets retrieved within the top-k predictions.
/// A prediction matches a GT triplet iff all three class labels are equal and
/// both boxes have IoU >= 0.5; matching is greedy one-to-one in rank order.
/// Returns 1.0 when the GT list is empty.
double recall_at_k(const std::vector<ResolvedPrediction>& predictions,
                   const std::vector<GroundTruthTriplet>& gts, int k);

struct RelationCount {
  std::string name;
  long count;
  double fraction;
};

/// Per-class relation counts over a corpus, sorted by descending count
/// (ties by class ID).
std::vector<RelationCount> relation_frequency(
    const std::vector<TextGraph>& corpus, const Vocab& vocab);

}  // namespace wsg
