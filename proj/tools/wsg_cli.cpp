// Command-line front end for the weakly-supervised scene graph pipeline.
//
// Subcommands: parse, gtgraph, train, infer, eval, stats, gradcheck.
// Exit codes: 0 success, 1 bad input, 2 numerical failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "wsg/checkpoint.hpp"
#include "wsg/pipeline.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
  std::string entities_path;
  std::string relations_path;
  std::string config_path;
  std::string embeddings_path;
  // CLI overrides; applied on top of the config file.
  std::optional<uint64_t> seed;
  std::optional<long> steps;
  std::optional<int> beam;
  std::optional<int> nt;
  bool no_phrasal = false;
  bool no_sequential = false;
  std::string k_list;
};

void add_vocab_opts(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--entities", o.entities_path, "entity class names, one per line")
      ->required();
  cmd->add_option("--relations", o.relations_path,
                  "relation class names, one per line")
      ->required();
}

void add_model_opts(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "key = value config file");
  cmd->add_option("--embeddings", o.embeddings_path,
                  "word embedding file (random when omitted)");
  cmd->add_option("--seed", o.seed, "RNG seed override");
  cmd->add_option("--steps", o.steps, "training step count override");
  cmd->add_option("--beam", o.beam, "beam width override");
  cmd->add_option("--nt", o.nt, "refinement iteration count override");
  cmd->add_flag("--no-phrasal", o.no_phrasal, "disable phrasal context layers");
  cmd->add_flag("--no-sequential", o.no_sequential,
                "disable sequential relabeling");
  cmd->add_option("--k", o.k_list, "comma-separated recall cutoffs");
}

wsg::PipelineConfig build_config(const CommonOpts& o) {
  wsg::PipelineConfig cfg;
  if (!o.config_path.empty()) cfg = wsg::PipelineConfig::load(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.steps) cfg.max_steps = *o.steps;
  if (o.beam) cfg.beam_width = *o.beam;
  if (o.nt) cfg.refine_iters = *o.nt;
  if (o.no_phrasal) cfg.phrasal = false;
  if (o.no_sequential) cfg.sequential = false;
  if (!o.k_list.empty()) cfg.set("k", o.k_list);
  cfg.validate();
  return cfg;
}

wsg::Vocab load_vocab(const CommonOpts& o) {
  return wsg::Vocab(wsg::Vocab::load_names(o.entities_path),
                    wsg::Vocab::load_names(o.relations_path));
}

wsg::Model build_model(const CommonOpts& o, const wsg::PipelineConfig& cfg,
                       const wsg::Vocab& vocab) {
  wsg::EmbeddingTable table =
      o.embeddings_path.empty()
          ? wsg::EmbeddingTable::random(vocab, cfg.dim, cfg.seed)
          : wsg::EmbeddingTable::load(o.embeddings_path, vocab, cfg.dim);
  return wsg::Model(cfg, vocab, std::move(table));
}

int cmd_parse(const CommonOpts& o, const std::string& input,
              const std::string& output) {
  wsg::Vocab vocab = load_vocab(o);
  std::ifstream in(input);
  if (!in) throw wsg::InputError("cannot open caption file: " + input);

  std::vector<wsg::GraphRecord> records;
  std::string line;
  int line_no = 0;
  int dropped_e = 0, dropped_r = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    wsg::ParseResult res = wsg::parse_caption(wsg::tokenize(line), vocab);
    dropped_e += res.dropped_entities;
    dropped_r += res.dropped_relations;
    records.push_back({"caption_" + std::to_string(line_no), std::move(res.graph)});
  }
  wsg::write_graph_file(output, records, vocab);
  std::cerr << "parsed " << records.size() << " captions (dropped " << dropped_e
            << " entities, " << dropped_r << " relations)\n";
  return 0;
}

// Input: one JSON object per line,
//   {"image_id": str, "triplets": [[subj, pred, obj, [x1,y1,x2,y2], [x1,y1,x2,y2]]...]}
// with class names resolved through the vocab.
int cmd_gtgraph(const CommonOpts& o, const std::string& input,
                const std::string& output) {
  wsg::Vocab vocab = load_vocab(o);
  std::ifstream in(input);
  if (!in) throw wsg::InputError("cannot open triplet file: " + input);

  std::vector<wsg::GraphRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    std::vector<wsg::AnnotatedTriplet> trips;
    for (const auto& t : j.at("triplets")) {
      int s = vocab.entity_id(t.at(0).get<std::string>());
      int p = vocab.relation_id(t.at(1).get<std::string>());
      int obj = vocab.entity_id(t.at(2).get<std::string>());
      if (s < 0 || p < 0 || obj < 0)
        throw wsg::InputError("unknown class name in triplet for image " +
                              j.at("image_id").get<std::string>());
      auto box = [](const json& b) {
        return wsg::Box{b.at(0).get<double>(), b.at(1).get<double>(),
                        b.at(2).get<double>(), b.at(3).get<double>()};
      };
      trips.push_back({s, p, obj, box(t.at(3)), box(t.at(4))});
    }
    records.push_back(
        {j.at("image_id").get<std::string>(), wsg::build_gt_graph(trips)});
  }
  wsg::write_graph_file(output, records, vocab);
  return 0;
}

int cmd_train(const CommonOpts& o, const std::string& data_path,
              const std::string& ckpt_path, const std::string& trace_path) {
  wsg::PipelineConfig cfg = build_config(o);
  wsg::Vocab vocab = load_vocab(o);
  wsg::DatasetWarnings warn;
  std::vector<wsg::ImageRecord> data =
      wsg::load_dataset(data_path, vocab, cfg.max_proposals, &warn);
  if (warn.skipped_records > 0)
    std::cerr << "warning: skipped " << warn.skipped_records
              << " malformed records\n";

  wsg::Model model = build_model(o, cfg, vocab);
  wsg::train_model(model, data, trace_path);
  wsg::save_checkpoint(ckpt_path, model.params());
  return 0;
}

int cmd_infer(const CommonOpts& o, const std::string& data_path,
              const std::string& ckpt_path, const std::string& out_path) {
  wsg::PipelineConfig cfg = build_config(o);
  wsg::Vocab vocab = load_vocab(o);
  std::vector<wsg::ImageRecord> data =
      wsg::load_dataset(data_path, vocab, cfg.max_proposals);

  wsg::Model model = build_model(o, cfg, vocab);
  wsg::load_checkpoint(ckpt_path, model.params());
  wsg::write_predictions(out_path, wsg::infer_dataset(model, data));
  return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& pred_path,
             const std::string& data_path, const std::string& out_path) {
  wsg::PipelineConfig cfg = build_config(o);
  wsg::Vocab vocab = load_vocab(o);
  std::vector<wsg::ImageRecord> data =
      wsg::load_dataset(data_path, vocab, cfg.max_proposals);
  std::vector<wsg::PredictionRecord> preds = wsg::load_predictions(pred_path);
  wsg::EvalReport report =
      wsg::evaluate_predictions(preds, data, cfg.recall_ks);
  if (out_path.empty()) {
    std::cout << report.to_tsv();
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw wsg::InputError("cannot open report file: " + out_path);
    out << report.to_tsv();
  }
  return 0;
}

int cmd_stats(const CommonOpts& o, const std::string& graphs_path,
              const std::string& out_path) {
  wsg::Vocab vocab = load_vocab(o);
  std::vector<wsg::GraphRecord> records =
      wsg::load_graph_file(graphs_path, vocab);
  std::vector<wsg::TextGraph> corpus;
  corpus.reserve(records.size());
  for (auto& r : records) corpus.push_back(std::move(r.graph));

  std::ostringstream csv;
  csv << "class,count,fraction\n";
  char buf[64];
  for (const wsg::RelationCount& rc : wsg::relation_frequency(corpus, vocab)) {
    std::snprintf(buf, sizeof(buf), "%.17g", rc.fraction);
    csv << rc.name << ',' << rc.count << ',' << buf << '\n';
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw wsg::InputError("cannot open stats file: " + out_path);
    out << csv.str();
  }
  return 0;
}

int cmd_gradcheck(uint64_t seed) {
  bool all_ok = true;
  for (const wsg::GradCheckResult& r : wsg::run_gradient_suite(seed)) {
    std::cout << r.module << "\tmax_rel_error=" << r.max_rel_error << '\t'
              << (r.passed ? "pass" : "FAIL") << '\n';
    all_ok = all_ok && r.passed;
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakly-supervised scene graph generation pipeline"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string input, output, data_path, ckpt_path, trace_path, pred_path;
  uint64_t gc_seed = 1;

  CLI::App* parse = app.add_subcommand("parse", "captions -> text graphs");
  add_vocab_opts(parse, o);
  parse->add_option("--input", input, "caption file, one per line")->required();
  parse->add_option("--output", output, "graph JSONL output")->required();

  CLI::App* gtgraph =
      app.add_subcommand("gtgraph", "annotated triplets -> image-level graphs");
  add_vocab_opts(gtgraph, o);
  gtgraph->add_option("--input", input, "triplet JSONL input")->required();
  gtgraph->add_option("--output", output, "graph JSONL output")->required();

  CLI::App* train = app.add_subcommand("train", "train on a caption dataset");
  add_vocab_opts(train, o);
  add_model_opts(train, o);
  train->add_option("--data", data_path, "dataset JSONL")->required();
  train->add_option("--out", ckpt_path, "checkpoint output path")->required();
  train->add_option("--trace", trace_path, "loss trace CSV output");

  CLI::App* infer = app.add_subcommand("infer", "caption-free inference");
  add_vocab_opts(infer, o);
  add_model_opts(infer, o);
  infer->add_option("--data", data_path, "dataset JSONL")->required();
  infer->add_option("--checkpoint", ckpt_path, "trained checkpoint")->required();
  infer->add_option("--out", output, "predictions JSONL output")->required();

  CLI::App* eval = app.add_subcommand("eval", "recall@K report");
  add_vocab_opts(eval, o);
  add_model_opts(eval, o);
  eval->add_option("--predictions", pred_path, "predictions JSONL")->required();
  eval->add_option("--data", data_path, "dataset JSONL with ground truth")
      ->required();
  eval->add_option("--out", output, "TSV report path (stdout when omitted)");

  CLI::App* stats = app.add_subcommand("stats", "relation class frequencies");
  add_vocab_opts(stats, o);
  stats->add_option("--graphs", input, "graph JSONL input")->required();
  stats->add_option("--out", output, "CSV output path (stdout when omitted)");

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gradcheck->add_option("--seed", gc_seed, "fixture seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse->parsed()) return cmd_parse(o, input, output);
    if (gtgraph->parsed()) return cmd_gtgraph(o, input, output);
    if (train->parsed()) return cmd_train(o, data_path, ckpt_path, trace_path);
    if (infer->parsed()) return cmd_infer(o, data_path, ckpt_path, output);
    if (eval->parsed()) return cmd_eval(o, pred_path, data_path, output);
    if (stats->parsed()) return cmd_stats(o, input, output);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_seed);
  } catch (const wsg::EvalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const wsg::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
