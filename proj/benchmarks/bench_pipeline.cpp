#include <benchmark/benchmark.h>

#include <random>

#include "wsg/inference.hpp"
#include "wsg/matrix.hpp"
#include "wsg/phrasal.hpp"
#include "wsg/tape.hpp"

namespace {

void BM_Matmul(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  wsg::Matrix a = wsg::Matrix::random_normal(n, n, 1.0, rng);
  wsg::Matrix b = wsg::Matrix::random_normal(n, n, 1.0, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wsg::matmul(a, b));
  }
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

void BM_MessagePassing(benchmark::State& state) {
  int n_e = static_cast<int>(state.range(0));
  int d = 64;
  std::mt19937_64 rng(2);
  wsg::ContextLayers layers = wsg::ContextLayers::init(d, 2, rng);
  wsg::Matrix h_ent = wsg::Matrix::random_normal(n_e, d, 1.0, rng);
  // chain graph: i -> i+1
  std::vector<wsg::Edge> edges;
  for (int i = 0; i + 1 < n_e; ++i) edges.push_back({i, i + 1});
  wsg::Matrix h_rel =
      wsg::Matrix::random_normal(static_cast<int>(edges.size()), d, 1.0, rng);

  for (auto _ : state) {
    wsg::Tape tape;
    auto ent = tape.leaf(h_ent, false);
    auto rel = tape.leaf(h_rel, false);
    wsg::ContextLayerNodes nodes = wsg::put_on_tape(tape, layers, false);
    auto out = wsg::message_pass_step(tape, edges, ent, rel, nodes);
    benchmark::DoNotOptimize(tape.value(out.first));
  }
}
BENCHMARK(BM_MessagePassing)->Arg(8)->Arg(32);

void BM_TopKTuples(benchmark::State& state) {
  int n_v = static_cast<int>(state.range(0));
  int c_e = 10, c_r = 20;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  wsg::Matrix p_det(n_v, c_e);
  std::vector<wsg::Candidate> cands;
  for (int i = 0; i < n_v; ++i)
    for (int c = 0; c < c_e; ++c) {
      p_det.at(i, c) = u(rng);
      if (c < 5) cands.push_back({i, c, p_det.at(i, c)});
    }
  wsg::Matrix p_relsub(n_v, c_r);
  wsg::Matrix p_relobj(n_v, c_r);
  for (int i = 0; i < n_v; ++i)
    for (int k = 0; k < c_r; ++k) {
      p_relsub.at(i, k) = u(rng);
      p_relobj.at(i, k) = u(rng);
    }
  wsg::RelationScoreProvider rel(p_relsub, p_relobj);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wsg::top_k_tuples(p_det, rel, cands, 100));
  }
}
BENCHMARK(BM_TopKTuples)->Arg(10)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
