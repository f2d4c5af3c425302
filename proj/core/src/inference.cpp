#include "wsg/inference.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace wsg {
namespace {

double clamped_log(double p) { return std::log(std::max(p, kLogClamp)); }

/// "a ranks before b": higher score first, then lexicographic on
/// (s_v, o_v, s_e, p_r, o_e).
bool tuple_less(const FiveTuple& a, const FiveTuple& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.s_v != b.s_v) return a.s_v < b.s_v;
  if (a.o_v != b.o_v) return a.o_v < b.o_v;
  if (a.s_e != b.s_e) return a.s_e < b.s_e;
  if (a.p_r != b.p_r) return a.p_r < b.p_r;
  return a.o_e < b.o_e;
}

std::vector<Candidate> dedup_candidates(const std::vector<Candidate>& in) {
  std::vector<Candidate> out;
  std::set<std::pair<int, int>> seen;
  for (const Candidate& c : in)
    if (seen.emplace(c.proposal, c.cls).second) out.push_back(c);
  return out;
}

}  // namespace

std::vector<Candidate> nms_per_class(const Matrix& p_det,
                                     const std::vector<Box>& boxes,
                                     const NmsConfig& cfg) {
  if (p_det.rows() != static_cast<int>(boxes.size()))
    throw ShapeError("nms: score rows != box count");
  std::vector<Candidate> out;
  for (int cls = 0; cls < p_det.cols(); ++cls) {
    std::vector<Candidate> pool;
    for (int i = 0; i < p_det.rows(); ++i)
      if (p_det.at(i, cls) >= cfg.score_threshold)
        pool.push_back({i, cls, p_det.at(i, cls)});
    std::sort(pool.begin(), pool.end(),
              [](const Candidate& a, const Candidate& b) {
                if (a.score != b.score) return a.score > b.score;
                return a.proposal < b.proposal;
              });
    std::vector<Candidate> kept;
    for (const Candidate& c : pool) {
      if (static_cast<int>(kept.size()) >= cfg.max_per_class) break;
      bool suppressed = false;
      for (const Candidate& kc : kept)
        if (iou(boxes[c.proposal], boxes[kc.proposal]) > cfg.iou_threshold) {
          suppressed = true;
          break;
        }
      if (!suppressed) kept.push_back(c);
    }
    out.insert(out.end(), kept.begin(), kept.end());
  }
  return out;
}

std::vector<FiveTuple> top_k_tuples(const Matrix& p_det,
                                    const RelationScoreProvider& p_rel,
                                    const std::vector<Candidate>& candidates,
                                    int k) {
  if (k < 1) throw ContractError("top_k_tuples: k must be >= 1");
  const std::vector<Candidate> cands = dedup_candidates(candidates);
  // bounded selection: max-heap whose top is the worst tuple kept so far
  std::priority_queue<FiveTuple, std::vector<FiveTuple>,
                      decltype(&tuple_less)>
      worst_first(&tuple_less);
  for (const Candidate& s : cands)
    for (const Candidate& o : cands) {
      if (s.proposal == o.proposal) continue;
      for (int r = 0; r < p_rel.num_classes(); ++r) {
        // summed in the order subject, relation, object so scores are
        // bit-identical across scoring routes
        const double score = clamped_log(p_det.at(s.proposal, s.cls)) +
                             clamped_log(p_rel(s.proposal, o.proposal, r)) +
                             clamped_log(p_det.at(o.proposal, o.cls));
        FiveTuple t{s.proposal, o.proposal, s.cls, r, o.cls, score};
        if (static_cast<int>(worst_first.size()) < k) {
          worst_first.push(t);
        } else if (tuple_less(t, worst_first.top())) {
          worst_first.pop();
          worst_first.push(t);
        }
      }
    }
  std::vector<FiveTuple> out(worst_first.size());
  for (auto it = out.rbegin(); it != out.rend(); ++it) {
    *it = worst_first.top();
    worst_first.pop();
  }
  return out;
}

std::vector<FiveTuple> brute_force_tuples(
    const Matrix& p_det, const Matrix& p_relsub, const Matrix& p_relobj,
    const std::vector<Candidate>& candidates, int k) {
  if (k < 1) throw ContractError("brute_force_tuples: k must be >= 1");
  RelationScoreProvider p_rel(p_relsub, p_relobj);
  std::vector<FiveTuple> all;
  for (const Candidate& s : candidates)
    for (const Candidate& o : candidates) {
      if (s.proposal == o.proposal) continue;
      for (int r = 0; r < p_relsub.cols(); ++r) {
        const double score = clamped_log(p_det.at(s.proposal, s.cls)) +
                             clamped_log(p_rel(s.proposal, o.proposal, r)) +
                             clamped_log(p_det.at(o.proposal, o.cls));
        all.push_back({s.proposal, o.proposal, s.cls, r, o.cls, score});
      }
    }
  std::sort(all.begin(), all.end(), tuple_less);
  std::vector<FiveTuple> out;
  for (const FiveTuple& t : all) {
    bool dup = false;
    for (const FiveTuple& u : out)
      if (u.same_tuple(t)) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(t);
    if (static_cast<int>(out.size()) == k) break;
  }
  return out;
}

}  // namespace wsg
