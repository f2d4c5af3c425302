#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wsg/geometry.hpp"
#include "wsg/inference.hpp"

using namespace wsg;

namespace {

std::vector<Box> disjoint_boxes(int n) {
  std::vector<Box> b;
  for (int i = 0; i < n; ++i) {
    double o = 100.0 * i;
    b.push_back({o, o, o + 10.0, o + 10.0});
  }
  return b;
}

}  // namespace

TEST_CASE("nms: identical boxes, same class, higher score survives") {
  Matrix p_det(2, 1, {0.8, 0.9});
  std::vector<Box> boxes = {{0, 0, 10, 10}, {0, 0, 10, 10}};
  auto out = nms_per_class(p_det, boxes, NmsConfig{});
  REQUIRE(out.size() == 1);
  CHECK(out[0].proposal == 1);
  CHECK(out[0].score == 0.9);
}

TEST_CASE("nms: identical boxes, different classes, both survive") {
  Matrix p_det(2, 2, {0.8, 0.0, 0.0, 0.9});
  std::vector<Box> boxes = {{0, 0, 10, 10}, {0, 0, 10, 10}};
  auto out = nms_per_class(p_det, boxes, NmsConfig{});
  CHECK(out.size() == 2);
}

TEST_CASE("nms: per-class cap of 4") {
  Matrix p_det(6, 1);
  for (int i = 0; i < 6; ++i) p_det.at(i, 0) = 0.5 + 0.01 * i;
  auto out = nms_per_class(p_det, disjoint_boxes(6), NmsConfig{});
  CHECK(out.size() == 4);
}

TEST_CASE("nms: score threshold filters low detections") {
  Matrix p_det(2, 1, {0.005, 0.5});
  auto out = nms_per_class(p_det, disjoint_boxes(2), NmsConfig{});
  REQUIRE(out.size() == 1);
  CHECK(out[0].proposal == 1);
}

TEST_CASE("nms: no two same-class survivors overlap above threshold") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 50);
  std::vector<Box> boxes;
  Matrix p_det(12, 2);
  for (int i = 0; i < 12; ++i) {
    double x = u(rng), y = u(rng);
    boxes.push_back({x, y, x + 20, y + 20});
    p_det.at(i, 0) = u(rng) / 50.0;
    p_det.at(i, 1) = u(rng) / 50.0;
  }
  NmsConfig cfg;
  auto out = nms_per_class(p_det, boxes, cfg);
  for (size_t a = 0; a < out.size(); ++a)
    for (size_t b = a + 1; b < out.size(); ++b)
      if (out[a].cls == out[b].cls)
        CHECK(iou(boxes[out[a].proposal], boxes[out[b].proposal]) <=
              cfg.iou_threshold);
}

TEST_CASE("top-k: exhausted space returns the whole space") {
  // one subject candidate, one object candidate, c_r = 2
  Matrix p_det(2, 1, {0.7, 0.6});
  Matrix p_relsub(2, 2, {0.5, 0.5, 0.4, 0.6});
  Matrix p_relobj(2, 2, {0.3, 0.7, 0.2, 0.8});
  RelationScoreProvider rel(p_relsub, p_relobj);
  std::vector<Candidate> cands = {{0, 0, 0.7}, {1, 0, 0.6}};
  auto out = top_k_tuples(p_det, rel, cands, 5);
  // (0,1) and (1,0) pairs x 2 predicates = 4 tuples
  CHECK(out.size() == 4);
  for (size_t i = 1; i < out.size(); ++i)
    CHECK(out[i - 1].score >= out[i].score);
}

TEST_CASE("top-k: stored scores recompute from the probability lookups") {
  Matrix p_det(3, 2, {0.6, 0.4, 0.3, 0.7, 0.5, 0.5});
  Matrix p_relsub(3, 2, {0.9, 0.1, 0.5, 0.5, 0.2, 0.8});
  Matrix p_relobj(3, 2, {0.4, 0.6, 0.7, 0.3, 0.6, 0.4});
  RelationScoreProvider rel(p_relsub, p_relobj);
  std::vector<Candidate> cands;
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 2; ++c) cands.push_back({i, c, p_det.at(i, c)});
  for (const FiveTuple& t : top_k_tuples(p_det, rel, cands, 20)) {
    double expect = std::log(p_det.at(t.s_v, t.s_e)) +
                    std::log(rel(t.s_v, t.o_v, t.p_r)) +
                    std::log(p_det.at(t.o_v, t.o_e));
    CHECK(t.score == doctest::Approx(expect).epsilon(1e-9));
    CHECK(t.s_v != t.o_v);
  }
}

TEST_CASE("top-k: all-equal probabilities break ties lexicographically") {
  int n_v = 3, c_r = 2;
  Matrix p_det(n_v, 2, 0.5);
  Matrix p_rel(n_v, c_r, 0.5);
  RelationScoreProvider rel(p_rel, p_rel);
  std::vector<Candidate> cands;
  for (int i = 0; i < n_v; ++i) cands.push_back({i, 0, 0.5});
  auto out = top_k_tuples(p_det, rel, cands, 100);
  for (size_t i = 1; i < out.size(); ++i) {
    const FiveTuple& a = out[i - 1];
    const FiveTuple& b = out[i];
    auto key = [](const FiveTuple& t) {
      return std::make_tuple(t.s_v, t.o_v, t.s_e, t.p_r, t.o_e);
    };
    CHECK(key(a) < key(b));
  }
}

TEST_CASE("brute force: empty candidates and k beyond the space") {
  Matrix p_det(2, 1, {0.7, 0.6});
  Matrix p_rel(2, 1, {0.5, 0.4});
  auto none = brute_force_tuples(p_det, p_rel, p_rel, {}, 10);
  CHECK(none.empty());

  std::vector<Candidate> cands = {{0, 0, 0.7}, {1, 0, 0.6}};
  auto all = brute_force_tuples(p_det, p_rel, p_rel, cands, 1000);
  CHECK(all.size() == 2);  // 2 ordered pairs x 1 predicate
}

TEST_CASE("top-k equals brute force on random small instances") {
  std::mt19937_64 rng(100);
  std::uniform_int_distribution<int> nv_d(1, 5), ce_d(1, 4), cr_d(1, 3),
      k_d(1, 20);
  std::uniform_real_distribution<double> u(0.02, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    int n_v = nv_d(rng), c_e = ce_d(rng), c_r = cr_d(rng), k = k_d(rng);
    Matrix p_det(n_v, c_e), p_relsub(n_v, c_r), p_relobj(n_v, c_r);
    for (size_t i = 0; i < p_det.size(); ++i) p_det[i] = u(rng);
    for (size_t i = 0; i < p_relsub.size(); ++i) {
      p_relsub[i] = u(rng);
      p_relobj[i] = u(rng);
    }
    std::vector<Box> boxes = disjoint_boxes(n_v);
    auto cands = nms_per_class(p_det, boxes, NmsConfig{});
    RelationScoreProvider rel(p_relsub, p_relobj);
    auto fast = top_k_tuples(p_det, rel, cands, k);
    auto slow = brute_force_tuples(p_det, p_relsub, p_relobj, cands, k);
    REQUIRE(fast.size() == slow.size());
    for (size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i].same_tuple(slow[i]));
      CHECK(fast[i].score == slow[i].score);
    }
  }
}

TEST_CASE("iou hand-computed cases") {
  Box a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, Box{20, 20, 30, 30}) == 0.0);
  CHECK(iou(a, Box{5, 0, 15, 10}) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(iou(a, Box{5, 0, 15, 10}) == iou(Box{5, 0, 15, 10}, a));
  CHECK_THROWS_AS(iou(a, Box{1, 1, 1, 5}), InputError);
}
