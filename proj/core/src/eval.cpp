#include "wsg/eval.hpp"

#include <algorithm>
#include <numeric>

namespace wsg {

double recall_at_k(const std::vector<ResolvedPrediction>& predictions,
                   const std::vector<GroundTruthTriplet>& gts, int k) {
  if (gts.empty()) return 1.0;
  std::vector<bool> consumed(gts.size(), false);
  int matched = 0;
  const int limit = std::min<int>(k, static_cast<int>(predictions.size()));
  for (int p = 0; p < limit; ++p) {
    const ResolvedPrediction& pred = predictions[p];
    for (size_t g = 0; g < gts.size(); ++g) {
      if (consumed[g]) continue;
      const GroundTruthTriplet& gt = gts[g];
      if (pred.tuple.s_e != gt.s_e || pred.tuple.p_r != gt.p_r ||
          pred.tuple.o_e != gt.o_e)
        continue;
      if (iou(pred.subj_box, gt.subj_box) < 0.5 ||
          iou(pred.obj_box, gt.obj_box) < 0.5)
        continue;
      consumed[g] = true;
      ++matched;
      break;
    }
  }
  return static_cast<double>(matched) / static_cast<double>(gts.size());
}

std::vector<RelationCount> relation_frequency(
    const std::vector<TextGraph>& corpus, const Vocab& vocab) {
  std::vector<long> counts(vocab.num_relations(), 0);
  long total = 0;
  for (const TextGraph& g : corpus)
    for (const Relation& r : g.relations) {
      ++counts[r.rel];
      ++total;
    }
  std::vector<int> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&counts](int a, int b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return a < b;
  });
  std::vector<RelationCount> out;
  for (int id : order)
    out.push_back({vocab.relation_name(id), counts[id],
                   total > 0 ? static_cast<double>(counts[id]) / total : 0.0});
  return out;
}

}  // namespace wsg
