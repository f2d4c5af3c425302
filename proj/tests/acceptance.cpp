// End-to-end acceptance checks. Each criterion prints exactly one
// "criterion N (<name>): PASS|FAIL" line; the exit code is the number of
// failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "wsg/checkpoint.hpp"
#include "wsg/pipeline.hpp"
#include "wsg/refinement.hpp"

using namespace wsg;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int g_failures = 0;

void report(int n, const std::string& name, bool ok, const std::string& note) {
  std::printf("criterion %d (%s): %s%s%s\n", n, name.c_str(),
              ok ? "PASS" : "FAIL", note.empty() ? "" : " — ", note.c_str());
  if (!ok) ++g_failures;
}

// ---------------------------------------------------------------- corpus

constexpr int kSynthEntities = 5;
constexpr int kSynthRelations = 4;
constexpr int kSynthProposals = 8;
constexpr int kSynthDcnn = 24;

Vocab synth_vocab() {
  return Vocab({"ent0", "ent1", "ent2", "ent3", "ent4"},
               {"rel0", "rel1", "rel2", "rel3"});
}

// predicate determined by the (subject, object) class pair
int planted_predicate(int s_cls, int o_cls) {
  return (s_cls + 2 * o_cls) % kSynthRelations;
}

Box proposal_box(int i) {
  double o = 100.0 * i;
  return {o, o, o + 50.0, o + 50.0};
}

// Each image: kSynthProposals proposals on a fixed grid; features are class
// prototypes plus sigma=0.1 noise. Planted graphs of 2-4 entities and 1-3
// relations whose predicates are a deterministic function of the class pair.
// When two_same_class is set, every image carries two entities of one class
// that only their relations distinguish.
std::vector<ImageRecord> make_synthetic_corpus(uint64_t seed, int n_images,
                                               bool two_same_class) {
  std::mt19937_64 proto_rng(0xC0FFEE);  // prototypes shared across seeds
  Matrix prototypes =
      Matrix::random_normal(kSynthEntities, kSynthDcnn, 1.0, proto_rng);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::uniform_int_distribution<int> n_ent_d(2, 4);
  std::uniform_int_distribution<int> cls_d(0, kSynthEntities - 1);

  std::vector<ImageRecord> out;
  for (int img = 0; img < n_images; ++img) {
    ImageRecord rec;
    rec.image_id = "synth_" + std::to_string(img);

    int n_e = n_ent_d(rng);
    TextGraph g;
    for (int i = 0; i < n_e; ++i) g.entities.push_back(cls_d(rng));
    if (two_same_class && n_e >= 2) g.entities[1] = g.entities[0];

    // entity i lives on proposal slot[i]
    std::vector<int> slot(kSynthProposals);
    for (int i = 0; i < kSynthProposals; ++i) slot[i] = i;
    std::shuffle(slot.begin(), slot.end(), rng);

    int n_r = std::min(n_e - 1, 1 + static_cast<int>(rng() % 3));
    for (int i = 0; i < n_r; ++i) {
      int s = i % n_e;
      int o = (i + 1) % n_e;
      g.relations.push_back(
          {planted_predicate(g.entities[s], g.entities[o]), s, o});
    }

    rec.proposals.features = Matrix(kSynthProposals, kSynthDcnn);
    std::vector<int> proposal_cls(kSynthProposals);
    for (int i = 0; i < kSynthProposals; ++i) {
      rec.proposals.boxes.push_back(proposal_box(i));
      proposal_cls[i] = cls_d(rng);  // distractor class for unused slots
    }
    for (int i = 0; i < n_e; ++i) proposal_cls[slot[i]] = g.entities[i];
    for (int i = 0; i < kSynthProposals; ++i)
      for (int j = 0; j < kSynthDcnn; ++j)
        rec.proposals.features.at(i, j) =
            prototypes.at(proposal_cls[i], j) + noise(rng);

    for (const Relation& r : g.relations)
      rec.gt.push_back({proposal_box(slot[r.subj]), proposal_box(slot[r.obj]),
                        g.entities[r.subj], r.rel, g.entities[r.obj]});
    rec.graph = g;
    out.push_back(std::move(rec));
  }
  return out;
}

PipelineConfig synth_config(uint64_t seed) {
  PipelineConfig cfg;
  cfg.dim = 16;
  cfg.d_cnn = kSynthDcnn;
  cfg.max_proposals = kSynthProposals;
  cfg.refine_iters = 1;
  cfg.phrasal_depth = 2;
  cfg.beta = 0.5;
  cfg.batch_size = 10;
  cfg.learning_rate = 0.005;
  cfg.weight_decay = 1e-6;
  cfg.beam_width = 5;
  cfg.lstm_hidden = 16;
  cfg.dropout = 0.0;
  cfg.recall_ks = {50};
  cfg.seed = seed;
  cfg.max_steps = 600;
  return cfg;
}

double train_recall_at_50(const std::vector<ImageRecord>& corpus,
                          PipelineConfig cfg) {
  Vocab vocab = synth_vocab();
  Model model(cfg, vocab, EmbeddingTable::random(vocab, cfg.dim, cfg.seed));
  train_model(model, corpus, "");
  EvalReport rep =
      evaluate_predictions(infer_dataset(model, corpus), corpus, {50});
  return rep.micro.empty() ? 0.0 : rep.micro[0];
}

// ---------------------------------------------------------------- criteria

void criterion_1_gradients() {
  auto start = Clock::now();
  std::vector<GradCheckResult> results = run_gradient_suite(1);
  double elapsed = seconds_since(start);
  bool ok = elapsed < 60.0 && !results.empty();
  std::ostringstream note;
  for (const GradCheckResult& r : results) {
    ok = ok && r.passed;
    note << r.module << "=" << r.max_rel_error << " ";
  }
  note << "in " << elapsed << "s";
  report(1, "gradient suite", ok, note.str());
}

void criterion_2_topk_oracle() {
  auto start = Clock::now();
  bool ok = true;
  int instances = 0;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nv_d(1, 5), ce_d(1, 4), cr_d(1, 3),
      k_d(1, 20);
  std::uniform_real_distribution<double> u(0.02, 1.0);
  while (instances < 200) {
    int n_v = nv_d(rng), c_e = ce_d(rng), c_r = cr_d(rng), k = k_d(rng);
    Matrix p_det(n_v, c_e), p_relsub(n_v, c_r), p_relobj(n_v, c_r);
    for (size_t i = 0; i < p_det.size(); ++i) p_det[i] = u(rng);
    for (size_t i = 0; i < p_relsub.size(); ++i) {
      p_relsub[i] = u(rng);
      p_relobj[i] = u(rng);
    }
    std::vector<Box> boxes;
    for (int i = 0; i < n_v; ++i) boxes.push_back(proposal_box(i));
    std::vector<Candidate> cands = nms_per_class(p_det, boxes, NmsConfig{});
    RelationScoreProvider rel(p_relsub, p_relobj);
    std::vector<FiveTuple> fast = top_k_tuples(p_det, rel, cands, k);
    std::vector<FiveTuple> slow =
        brute_force_tuples(p_det, p_relsub, p_relobj, cands, k);
    if (fast.size() != slow.size()) ok = false;
    for (size_t i = 0; ok && i < fast.size(); ++i)
      if (!fast[i].same_tuple(slow[i]) || fast[i].score != slow[i].score)
        ok = false;
    ++instances;
    if (!ok) break;
  }
  double elapsed = seconds_since(start);
  ok = ok && elapsed < 5.0;
  report(2, "top-k vs brute force", ok,
         std::to_string(instances) + " instances in " +
             std::to_string(elapsed) + "s");
}

void criterion_3_beam_oracle() {
  auto start = Clock::now();
  int c_e = 3, c_r = 2, d = 4, d_cnn = 6;
  bool ok = true;
  for (uint64_t seed = 0; ok && seed < 100; ++seed) {
    std::mt19937_64 rng(seed * 7919 + 13);
    RecurrentCore core = RecurrentCore::init(5, d, d_cnn, 0.0, rng);
    // larger weights than the training init to spread the distributions
    core.w_x = Matrix::random_normal(core.w_x.rows(), core.w_x.cols(), 0.4, rng);
    core.w_h = Matrix::random_normal(core.w_h.rows(), core.w_h.cols(), 0.4, rng);
    core.w_out =
        Matrix::random_normal(core.w_out.rows(), core.w_out.cols(), 0.4, rng);
    Matrix w_ent = Matrix::random_normal(c_e, d, 1.0, rng);
    Matrix w_rel = Matrix::random_normal(c_r, d, 1.0, rng);

    ProposalSet ps;
    ps.boxes = {proposal_box(0), proposal_box(1)};
    ps.features = Matrix::random_normal(2, d_cnn, 1.0, rng);

    std::vector<FiveTuple> cands = {{0, 1, 0, 0, 0, -1.0}};
    std::vector<FiveTuple> out =
        beam_relabel(cands, ps, core, w_ent, w_rel, 9);
    if (out.empty()) {
      ok = false;
      break;
    }

    Matrix v_sub(1, d_cnn), v_obj(1, d_cnn);
    for (int j = 0; j < d_cnn; ++j) {
      v_sub.at(0, j) = ps.features.at(0, j);
      v_obj.at(0, j) = ps.features.at(1, j);
    }
    double best = -1e300;
    int bs = -1, bo = -1, bp = -1;
    for (int s = 0; s < c_e; ++s)
      for (int o = 0; o < c_e; ++o) {
        auto [p_sub, p_obj, p_pred] =
            forward_triplet(v_sub, v_obj, s, o, core, w_ent, w_rel);
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
    ok = out[0].s_e == bs && out[0].o_e == bo && out[0].p_r == bp &&
         std::abs(out[0].score - best) <= 1e-9;
  }
  double elapsed = seconds_since(start);
  ok = ok && elapsed < 5.0;
  report(3, "beam search vs exhaustive", ok,
         "100 cores in " + std::to_string(elapsed) + "s");
}

void criterion_4_pseudo_labels() {
  bool ok = true;

  // Table-1 worked example: E=[girl, banana] at classes 2 and 5
  TextGraph g;
  g.entities = {2, 5};
  PseudoLabels pl = extract_pseudo_labels(g, {10, 17}, {10, 17}, 20, 8, 4);
  double sum = 0;
  for (size_t k = 0; k < pl.y_det.size(); ++k) sum += pl.y_det[k];
  ok = ok && pl.y_det.at(10, 2) == 1.0 && pl.y_det.at(17, 5) == 1.0 &&
       sum == 2.0;

  // relation labels through the final grounding
  TextGraph gr;
  gr.entities = {0, 1};
  gr.relations = {{2, 0, 1}};
  PseudoLabels pr = extract_pseudo_labels(gr, {0, 0}, {3, 7}, 10, 4, 5);
  ok = ok && pr.y_relsub.at(3, 2) == 1.0 && pr.y_relobj.at(7, 2) == 1.0;

  // refinement case 1: hand-filled 3x2 selection
  Matrix p1(3, 2, {0.9, 0.1, 0.2, 0.8, 0.6, 0.4});
  RefinedGrounding r1 = refine_grounding(p1, {1, 0});
  ok = ok && r1.attention.at(0, 0) == 0.1 && r1.attention.at(0, 1) == 0.8 &&
       r1.attention.at(0, 2) == 0.4 && r1.attention.at(1, 0) == 0.9 &&
       r1.g == std::vector<int>{1, 0} && r1.y_det.at(1, 1) == 1.0 &&
       r1.y_det.at(0, 0) == 1.0;

  // refinement case 2: same-class entities share the selected column
  RefinedGrounding r2 = refine_grounding(p1, {0, 0});
  ok = ok && r2.g == std::vector<int>{0, 0} &&
       r2.attention.at(0, 2) == r2.attention.at(1, 2);

  // refinement case 3: tie broken by the smallest proposal index
  Matrix p3(3, 1, {0.5, 0.5, 0.5});
  RefinedGrounding r3 = refine_grounding(p3, {0});
  ok = ok && r3.g == std::vector<int>{0};

  report(4, "pseudo labels and refinement", ok, "");
}

void criterion_5_overfit() {
  auto start = Clock::now();
  std::vector<ImageRecord> corpus = make_synthetic_corpus(5, 50, false);
  double recall = train_recall_at_50(corpus, synth_config(5));
  double elapsed = seconds_since(start);
  bool ok = recall >= 0.8 && elapsed < 300.0;
  report(5, "synthetic overfit", ok,
         "train recall@50 = " + std::to_string(recall) + " in " +
             std::to_string(elapsed) + "s");
}

void criterion_6_ablation() {
  int hold = 0;
  std::ostringstream note;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    std::vector<ImageRecord> corpus = make_synthetic_corpus(seed * 31, 30, true);

    PipelineConfig basic = synth_config(seed);
    basic.phrasal = false;
    basic.sequential = false;
    basic.refine_iters = 0;
    basic.max_steps = 250;

    PipelineConfig iter = basic;
    iter.phrasal = true;
    iter.refine_iters = 1;

    PipelineConfig full = iter;
    full.sequential = true;

    double r_basic = train_recall_at_50(corpus, basic);
    double r_iter = train_recall_at_50(corpus, iter);
    double r_full = train_recall_at_50(corpus, full);
    if (r_full >= r_iter && r_iter >= r_basic) ++hold;
    note << r_basic << "/" << r_iter << "/" << r_full << " ";
  }
  report(6, "ablation ordering", hold >= 8,
         "held on " + std::to_string(hold) + "/10 seeds [" + note.str() + "]");
}

std::string file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void criterion_7_caption_free() {
  std::vector<ImageRecord> corpus = make_synthetic_corpus(7, 10, false);
  PipelineConfig cfg = synth_config(7);
  cfg.max_steps = 50;
  Vocab vocab = synth_vocab();
  Model model(cfg, vocab, EmbeddingTable::random(vocab, cfg.dim, cfg.seed));
  train_model(model, corpus, "");

  std::vector<ImageRecord> stripped = corpus;
  for (ImageRecord& rec : stripped) {
    rec.captions.clear();
    rec.graph.reset();
    rec.gt.clear();
  }
  write_predictions("acc7_with.jsonl", infer_dataset(model, corpus));
  write_predictions("acc7_without.jsonl", infer_dataset(model, stripped));
  bool ok = file_bytes("acc7_with.jsonl") == file_bytes("acc7_without.jsonl") &&
            !file_bytes("acc7_with.jsonl").empty();
  std::remove("acc7_with.jsonl");
  std::remove("acc7_without.jsonl");
  report(7, "caption-free inference", ok, "");
}

void criterion_8_determinism() {
  std::vector<ImageRecord> corpus = make_synthetic_corpus(8, 10, false);
  PipelineConfig cfg = synth_config(8);
  cfg.max_steps = 60;
  Vocab vocab = synth_vocab();

  auto run = [&](const std::string& tag) {
    Model model(cfg, vocab, EmbeddingTable::random(vocab, cfg.dim, cfg.seed));
    train_model(model, corpus, "acc8_trace_" + tag + ".csv");
    save_checkpoint("acc8_ckpt_" + tag + ".bin", model.params());
    write_predictions("acc8_pred_" + tag + ".jsonl",
                      infer_dataset(model, corpus));
  };
  run("a");
  run("b");
  bool ok =
      file_bytes("acc8_trace_a.csv") == file_bytes("acc8_trace_b.csv") &&
      file_bytes("acc8_ckpt_a.bin") == file_bytes("acc8_ckpt_b.bin") &&
      file_bytes("acc8_pred_a.jsonl") == file_bytes("acc8_pred_b.jsonl") &&
      !file_bytes("acc8_trace_a.csv").empty();
  for (const char* f : {"acc8_trace_a.csv", "acc8_trace_b.csv",
                        "acc8_ckpt_a.bin", "acc8_ckpt_b.bin",
                        "acc8_pred_a.jsonl", "acc8_pred_b.jsonl"})
    std::remove(f);
  report(8, "bitwise determinism", ok, "");
}

void criterion_9_metrics() {
  bool ok = true;

  Box a{0, 0, 10, 10};
  ok = ok && iou(a, a) == 1.0;
  ok = ok && iou(a, Box{20, 20, 30, 30}) == 0.0;
  ok = ok && std::abs(iou(a, Box{5, 0, 15, 10}) - 1.0 / 3) <= 1e-12;

  auto pred = [](int s_e, int p_r, int o_e, Box sb, Box ob) {
    return ResolvedPrediction{{0, 1, s_e, p_r, o_e, -1.0}, sb, ob};
  };
  auto gt = [](int s_e, int p_r, int o_e, Box sb, Box ob) {
    return GroundTruthTriplet{sb, ob, s_e, p_r, o_e};
  };
  Box b{20, 20, 30, 30}, c{50, 50, 60, 60};

  // case 1: one of two GTs matched
  ok = ok && recall_at_k({pred(0, 0, 1, a, b)},
                         {gt(0, 0, 1, a, b), gt(2, 1, 3, c, a)}, 50) == 0.5;
  // case 2: duplicate predictions consume a GT once
  ok = ok && recall_at_k({pred(0, 0, 1, a, b)},
                         {gt(0, 0, 1, a, b), gt(0, 0, 1, a, b)}, 50) == 0.5;
  // case 3: IoU exactly 0.5 counts (contained box, exact in floating point)
  Box g100{0, 0, 10, 10};
  Box half{0, 0, 10, 5};  // 50/100
  ok = ok && iou(g100, half) == 0.5;
  ok = ok && recall_at_k({pred(0, 0, 1, half, g100)},
                         {gt(0, 0, 1, g100, g100)}, 10) == 1.0;
  // case 4: IoU 0.49 does not count
  Box below{0, 0, 10, 4.9};  // 49/100
  ok = ok && std::abs(iou(g100, below) - 0.49) <= 1e-12 &&
       iou(g100, below) < 0.5;
  ok = ok && recall_at_k({pred(0, 0, 1, below, g100)},
                         {gt(0, 0, 1, g100, g100)}, 10) == 0.0;
  // case 5: perfect boxes but one wrong label
  ok = ok && recall_at_k({pred(0, 1, 1, g100, g100)},
                         {gt(0, 0, 1, g100, g100)}, 10) == 0.0;

  report(9, "recall and IoU hand cases", ok, "");
}

}  // namespace

int main() {
  criterion_1_gradients();
  criterion_2_topk_oracle();
  criterion_3_beam_oracle();
  criterion_4_pseudo_labels();
  criterion_5_overfit();
  criterion_6_ablation();
  criterion_7_caption_free();
  criterion_8_determinism();
  criterion_9_metrics();
  return g_failures;
}
