#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wsg/adam.hpp"
#include "wsg/gradcheck.hpp"
#include "wsg/sequential.hpp"

using namespace wsg;

namespace {

struct Toy {
  int d = 5, d_cnn = 7, hidden = 8;
  RecurrentCore core;
  Matrix w_ent;
  Matrix w_rel;

  Toy(int c_e, int c_r, uint64_t seed) {
    std::mt19937_64 rng(seed);
    core = RecurrentCore::init(hidden, d, d_cnn, 0.0, rng);
    w_ent = Matrix::random_normal(c_e, d, 1.0, rng);
    w_rel = Matrix::random_normal(c_r, d, 1.0, rng);
  }
};

// One training sample for the recurrent core.
struct Sample {
  TextGraph graph;
  std::vector<int> g;
  Matrix v_feat;
};

// Minimal teacher-forced training loop over the core's parameters.
void train_core(Toy& toy, const std::vector<Sample>& samples, int steps,
                double lr) {
  Matrix* mats[] = {&toy.core.w_x,     &toy.core.w_h,   &toy.core.b,
                    &toy.core.start,   &toy.core.w_vproj, &toy.core.w_out,
                    &toy.core.b_out};
  std::vector<AdamState> opt(7);
  std::mt19937_64 rng(99);
  for (int s = 0; s < steps; ++s) {
    for (const Sample& smp : samples) {
      Tape t;
      RecurrentCoreNodes nodes = put_on_tape(t, toy.core, true);
      auto v = t.leaf(smp.v_feat, false);
      auto we = t.leaf(toy.w_ent, false);
      auto wr = t.leaf(toy.w_rel, false);
      SequentialScores sc = sequential_scores(t, smp.graph, smp.g, v, nodes,
                                              toy.core, we, wr, false, rng);
      SequentialLabels labels;
      labels.y_cssub = Matrix(smp.graph.num_relations(), toy.w_ent.rows());
      labels.y_csobj = Matrix(smp.graph.num_relations(), toy.w_ent.rows());
      labels.y_cspred = Matrix(smp.graph.num_relations(), toy.w_rel.rows());
      for (int i = 0; i < smp.graph.num_relations(); ++i) {
        const Relation& r = smp.graph.relations[i];
        labels.y_cssub.at(i, smp.graph.entities[r.subj]) = 1;
        labels.y_csobj.at(i, smp.graph.entities[r.obj]) = 1;
        labels.y_cspred.at(i, r.rel) = 1;
      }
      auto [l1, l2, l3] = sequential_losses(t, sc, labels);
      auto total = t.add(t.add(l1, l2), l3);
      t.backward(total);
      Tape::NodeId ids[] = {nodes.w_x,     nodes.w_h,   nodes.b,  nodes.start,
                            nodes.w_vproj, nodes.w_out, nodes.b_out};
      for (int m = 0; m < 7; ++m)
        adam_step(*mats[m], t.grad(ids[m]), opt[m], lr, 0.0);
    }
  }
}

}  // namespace

TEST_CASE("forward triplet produces valid distributions") {
  Toy toy(4, 3, 1);
  std::mt19937_64 rng(1);
  Matrix v_sub = Matrix::random_normal(1, toy.d_cnn, 1.0, rng);
  Matrix v_obj = Matrix::random_normal(1, toy.d_cnn, 1.0, rng);
  auto [p_sub, p_obj, p_pred] =
      forward_triplet(v_sub, v_obj, 1, 2, toy.core, toy.w_ent, toy.w_rel);
  for (const Matrix* p : {&p_sub, &p_obj, &p_pred}) {
    double sum = 0;
    for (size_t k = 0; k < p->size(); ++k) {
      CHECK((*p)[k] >= 0.0);
      sum += (*p)[k];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK(p_sub.cols() == 4);
  CHECK(p_obj.cols() == 4);
  CHECK(p_pred.cols() == 3);
  CHECK_THROWS_AS(
      forward_triplet(v_sub, v_obj, 9, 2, toy.core, toy.w_ent, toy.w_rel),
      ContractError);
}

TEST_CASE("zero weights give uniform distributions at every step") {
  Toy toy(4, 3, 2);
  toy.core.w_x = Matrix(toy.core.w_x.rows(), toy.core.w_x.cols());
  toy.core.w_h = Matrix(toy.core.w_h.rows(), toy.core.w_h.cols());
  toy.core.b = Matrix(1, toy.core.b.cols());
  toy.core.w_out = Matrix(toy.hidden, toy.d);
  toy.core.b_out = Matrix(1, toy.d);
  Matrix v(1, toy.d_cnn, 1.0);
  auto [p_sub, p_obj, p_pred] =
      forward_triplet(v, v, 0, 1, toy.core, toy.w_ent, toy.w_rel);
  for (int j = 0; j < 4; ++j) CHECK(p_sub.at(0, j) == doctest::Approx(0.25));
  for (int j = 0; j < 3; ++j)
    CHECK(p_pred.at(0, j) == doctest::Approx(1.0 / 3));
}

TEST_CASE("sequential labels index subject/object classes per relation") {
  TextGraph g;
  g.entities = {2, 0, 3};  // girl, x, banana style
  g.relations = {{1, 0, 2}};
  Matrix y_ent(3, 4), y_rel(1, 2);
  y_ent.at(0, 2) = 1;
  y_ent.at(1, 0) = 1;
  y_ent.at(2, 3) = 1;
  y_rel.at(0, 1) = 1;
  SequentialLabels l = sequential_labels(g, y_ent, y_rel);
  CHECK(l.y_cssub.at(0, 2) == 1.0);
  CHECK(l.y_csobj.at(0, 3) == 1.0);
  CHECK(l.y_cspred.at(0, 1) == 1.0);

  TextGraph empty;
  empty.entities = {0};
  SequentialLabels le = sequential_labels(empty, Matrix(1, 4), Matrix(0, 2));
  CHECK(le.y_cssub.rows() == 0);
  CHECK(le.y_csobj.rows() == 0);
  CHECK(le.y_cspred.rows() == 0);
}

TEST_CASE("sequential losses: uniform predictor closed form") {
  // zeroed core: uniform predictions; 2 relations, c_e=4, c_r=3
  Toy toy(4, 3, 3);
  toy.core.w_x = Matrix(toy.core.w_x.rows(), toy.core.w_x.cols());
  toy.core.w_h = Matrix(toy.core.w_h.rows(), toy.core.w_h.cols());
  toy.core.b = Matrix(1, toy.core.b.cols());
  toy.core.w_out = Matrix(toy.hidden, toy.d);
  toy.core.b_out = Matrix(1, toy.d);

  TextGraph g;
  g.entities = {0, 1, 2};
  g.relations = {{0, 0, 1}, {2, 1, 2}};
  std::mt19937_64 rng(3);
  Matrix v_feat = Matrix::random_normal(3, toy.d_cnn, 1.0, rng);

  Tape t;
  RecurrentCoreNodes nodes = put_on_tape(t, toy.core, false);
  SequentialScores sc =
      sequential_scores(t, g, {0, 1, 2}, t.leaf(v_feat, false), nodes,
                        toy.core, t.leaf(toy.w_ent, false),
                        t.leaf(toy.w_rel, false), false, rng);
  Matrix y_ent(3, 4), y_rel(2, 3);
  y_ent.at(0, 0) = y_ent.at(1, 1) = y_ent.at(2, 2) = 1;
  y_rel.at(0, 0) = y_rel.at(1, 2) = 1;
  auto [l1, l2, l3] = sequential_losses(t, sc, sequential_labels(g, y_ent, y_rel));
  CHECK(t.value(l1).at(0, 0) == doctest::Approx(2 * std::log(4.0)).epsilon(1e-9));
  CHECK(t.value(l2).at(0, 0) == doctest::Approx(2 * std::log(4.0)).epsilon(1e-9));
  CHECK(t.value(l3).at(0, 0) == doctest::Approx(2 * std::log(3.0)).epsilon(1e-9));

  TextGraph no_rel;
  no_rel.entities = {0};
  SequentialScores sc0 =
      sequential_scores(t, no_rel, {0}, t.leaf(v_feat, false), nodes, toy.core,
                        t.leaf(toy.w_ent, false), t.leaf(toy.w_rel, false),
                        false, rng);
  auto [z1, z2, z3] =
      sequential_losses(t, sc0, sequential_labels(no_rel, Matrix(1, 4), Matrix(0, 3)));
  CHECK(t.value(z1).at(0, 0) == 0.0);
  CHECK(t.value(z3).at(0, 0) == 0.0);
}

TEST_CASE("gradients through the 3-step unrolled sequence") {
  Toy toy(3, 2, 4);
  TextGraph g;
  g.entities = {0, 2};
  g.relations = {{1, 0, 1}};
  std::mt19937_64 rng(4);
  Matrix v_feat = Matrix::random_normal(2, toy.d_cnn, 1.0, rng);
  SequentialLabels labels;
  labels.y_cssub = Matrix(1, 3);
  labels.y_csobj = Matrix(1, 3);
  labels.y_cspred = Matrix(1, 2);
  labels.y_cssub.at(0, 0) = labels.y_csobj.at(0, 2) = labels.y_cspred.at(0, 1) = 1;

  auto build = [&](const std::vector<Matrix>& p, Tape* tape,
                   std::vector<Tape::NodeId>* ids) {
    RecurrentCore c = toy.core;
    c.w_x = p[0];
    c.w_h = p[1];
    c.b = p[2];
    c.start = p[3];
    c.w_vproj = p[4];
    c.w_out = p[5];
    c.b_out = p[6];
    Tape& t = *tape;
    RecurrentCoreNodes nodes = put_on_tape(t, c, true);
    if (ids)
      *ids = {nodes.w_x,     nodes.w_h,   nodes.b,  nodes.start,
              nodes.w_vproj, nodes.w_out, nodes.b_out};
    std::mt19937_64 local_rng(4);
    SequentialScores sc = sequential_scores(
        t, g, {0, 1}, t.leaf(v_feat, false), nodes, c,
        t.leaf(toy.w_ent, false), t.leaf(toy.w_rel, false), false, local_rng);
    auto [l1, l2, l3] = sequential_losses(t, sc, labels);
    return t.add(t.add(l1, l2), l3);
  };

  std::vector<Matrix> params = {toy.core.w_x,     toy.core.w_h,   toy.core.b,
                                toy.core.start,   toy.core.w_vproj,
                                toy.core.w_out,   toy.core.b_out};
  Tape t;
  std::vector<Tape::NodeId> ids;
  auto loss = build(params, &t, &ids);
  t.backward(loss);
  std::vector<Matrix> analytic;
  for (auto id : ids) analytic.push_back(t.grad(id));

  double err = finite_diff_check(
      [&](const std::vector<Matrix>& p) {
        Tape local;
        auto node = build(p, &local, nullptr);
        return local.value(node).at(0, 0);
      },
      params, analytic, 1e-4);
  CHECK(err < 1e-3);
}

TEST_CASE("beam width 1 is the greedy argmax chain") {
  Toy toy(3, 2, 5);
  std::mt19937_64 rng(5);
  ProposalSet ps;
  ps.boxes = {{0, 0, 10, 10}, {20, 20, 30, 30}};
  ps.features = Matrix::random_normal(2, toy.d_cnn, 1.0, rng);
  std::vector<FiveTuple> cands = {{0, 1, 0, 0, 0, -1.0}};
  auto out = beam_relabel(cands, ps, toy.core, toy.w_ent, toy.w_rel, 1);
  REQUIRE(out.size() == 1);

  // reproduce greedily with the plain forward
  Matrix v_sub(1, toy.d_cnn), v_obj(1, toy.d_cnn);
  for (int j = 0; j < toy.d_cnn; ++j) {
    v_sub.at(0, j) = ps.features.at(0, j);
    v_obj.at(0, j) = ps.features.at(1, j);
  }
  // step 1: subject distribution from the start token
  LstmState st0{Matrix(1, toy.hidden), Matrix(1, toy.hidden)};
  Matrix proj_sub = matmul(v_sub, toy.core.w_vproj);
  Matrix x1 = concat_cols({&toy.core.start, &proj_sub});
  LstmState st1 = lstm_step_plain(toy.core, x1, st0);
  int s_e = argmax_rows(step_distribution_plain(toy.core, st1.h, toy.w_ent))[0];
  CHECK(out[0].s_e == s_e);
}

TEST_CASE("wide beam equals exhaustive enumeration") {
  int c_e = 3, c_r = 2;
  Toy toy(c_e, c_r, 6);
  std::mt19937_64 rng(6);
  ProposalSet ps;
  ps.boxes = {{0, 0, 10, 10}, {20, 20, 30, 30}};
  ps.features = Matrix::random_normal(2, toy.d_cnn, 1.0, rng);
  std::vector<FiveTuple> cands = {{0, 1, 0, 0, 0, -1.0}};
  auto out = beam_relabel(cands, ps, toy.core, toy.w_ent, toy.w_rel, 9);
  REQUIRE(!out.empty());
  for (size_t i = 1; i < out.size(); ++i) CHECK(out[i - 1].score >= out[i].score);

  // exhaustive over all 18 sequences with the plain forward path
  Matrix v_sub(1, toy.d_cnn), v_obj(1, toy.d_cnn);
  for (int j = 0; j < toy.d_cnn; ++j) {
    v_sub.at(0, j) = ps.features.at(0, j);
    v_obj.at(0, j) = ps.features.at(1, j);
  }
  double best = -1e300;
  int bs = -1, bo = -1, bp = -1;
  for (int s = 0; s < c_e; ++s)
    for (int o = 0; o < c_e; ++o) {
      auto [p_sub, p_obj, p_pred] =
          forward_triplet(v_sub, v_obj, s, o, toy.core, toy.w_ent, toy.w_rel);
      for (int p = 0; p < c_r; ++p) {
        double sc = std::log(p_sub.at(0, s)) + std::log(p_obj.at(0, o)) +
                    std::log(p_pred.at(0, p));
        if (sc > best) {
          best = sc;
          bs = s;
          bo = o;
          bp = p;
        }
      }
    }
  CHECK(out[0].s_e == bs);
  CHECK(out[0].o_e == bo);
  CHECK(out[0].p_r == bp);
  CHECK(out[0].score == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("overfit a toy corpus: ride is recalled from region features") {
  // classes: person=0, horse=1, dog=2; relations: ride=0, pet=1
  Toy toy(3, 2, 7);
  std::mt19937_64 rng(7);
  Matrix proto = Matrix::random_normal(3, toy.d_cnn, 1.0, rng);
  auto feat_of = [&](int cls) {
    Matrix f(1, toy.d_cnn);
    for (int j = 0; j < toy.d_cnn; ++j) f.at(0, j) = proto.at(cls, j);
    return f;
  };

  Sample ride;
  ride.graph.entities = {0, 1};
  ride.graph.relations = {{0, 0, 1}};  // person-ride-horse
  ride.g = {0, 1};
  Matrix f0 = feat_of(0), f1 = feat_of(1), f2 = feat_of(2);
  ride.v_feat = concat_rows({&f0, &f1});

  Sample pet;
  pet.graph.entities = {0, 2};
  pet.graph.relations = {{1, 0, 1}};  // person-pet-dog
  pet.g = {0, 1};
  pet.v_feat = concat_rows({&f0, &f2});

  train_core(toy, {ride, pet}, 150, 0.02);

  auto [p_sub, p_obj, p_pred] =
      forward_triplet(f0, f1, 0, 1, toy.core, toy.w_ent, toy.w_rel);
  CHECK(argmax_rows(p_pred)[0] == 0);  // "ride"
  auto [q_sub, q_obj, q_pred] =
      forward_triplet(f0, f2, 0, 2, toy.core, toy.w_ent, toy.w_rel);
  CHECK(argmax_rows(q_pred)[0] == 1);  // "pet"
}

TEST_CASE("relabeling corrects the predicate from corpus statistics") {
  // classes: plate=0, pizza=1; relations: on=0, under=1
  Toy toy(2, 2, 8);
  std::mt19937_64 rng(8);
  Matrix proto = Matrix::random_normal(2, toy.d_cnn, 1.0, rng);
  auto feat_of = [&](int cls) {
    Matrix f(1, toy.d_cnn);
    for (int j = 0; j < toy.d_cnn; ++j) f.at(0, j) = proto.at(cls, j);
    return f;
  };

  Sample under;
  under.graph.entities = {0, 1};
  under.graph.relations = {{1, 0, 1}};  // plate-under-pizza, the only tuple
  under.g = {0, 1};
  Matrix f0 = feat_of(0), f1 = feat_of(1);
  under.v_feat = concat_rows({&f0, &f1});
  train_core(toy, {under}, 200, 0.02);

  ProposalSet ps;
  ps.boxes = {{0, 0, 10, 10}, {20, 20, 30, 30}};
  ps.features = under.v_feat;
  // candidate comes in labeled plate-ON-pizza
  std::vector<FiveTuple> cands = {{0, 1, 0, 0, 1, -0.5}};
  auto out = beam_relabel(cands, ps, toy.core, toy.w_ent, toy.w_rel, 5);
  REQUIRE(!out.empty());
  CHECK(out[0].s_e == 0);
  CHECK(out[0].p_r == 1);  // corrected to "under"
  CHECK(out[0].o_e == 1);
}
