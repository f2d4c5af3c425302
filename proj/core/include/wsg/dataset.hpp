#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wsg/eval.hpp"
#include "wsg/grounding.hpp"
#include "wsg/inference.hpp"
#include "wsg/text_graph.hpp"
#include "wsg/vocab.hpp"

namespace wsg {

struct ImageRecord {
  std::string image_id;
  ProposalSet proposals;
  std::vector<std::string> captions;
  std::optional<TextGraph> graph;  // pre-parsed, preferred over captions
  std::vector<GroundTruthTriplet> gt;  // eval only

  bool has_supervision() const { return graph.has_value() || !captions.empty(); }
};

struct DatasetWarnings {
  int skipped_records = 0;
  int dropped_entities = 0;
  int dropped_relations = 0;
};

/// One JSON object per line:
///   {"image_id": str, "boxes": [[x1,y1,x2,y2]...], "features": [[...]...],
///    "captions": [str...], "graph": {...}, "gt": [{...}...]}
/// "features" may be omitted when a "<path>.feat" sidecar exists. Proposals
/// are truncated to max_proposals. Malformed records are skipped and counted.
std::vector<ImageRecord> load_dataset(const std::string& path,
                                      const Vocab& vocab, int max_proposals,
                                      DatasetWarnings* warnings = nullptr);

/// Sidecar binary feature file: "WSGF" magic, then per record
/// u32 id length, id bytes, u32 rows, u32 cols, rows*cols LE 32-bit floats.
void write_feature_sidecar(const std::string& path,
                           const std::vector<ImageRecord>& records);

// Pre-parsed graph files (one JSON object per line):
//   {"image_id": str, "entities": [str...],
//    "relations": [[rel, subj_idx, obj_idx]...],
//    "attributes": [[attr_word, entity_idx]...]}
struct GraphRecord {
  std::string image_id;
  TextGraph graph;
};

std::vector<GraphRecord> load_graph_file(const std::string& path,
                                         const Vocab& vocab,
                                         DatasetWarnings* warnings = nullptr);
void write_graph_file(const std::string& path,
                      const std::vector<GraphRecord>& records,
                      const Vocab& vocab);

// Predictions (one JSON object per line, tuples sorted by score):
//   {"image_id": str, "tuples": [[s_v,o_v,s_e,p_r,o_e,score]...]}
struct PredictionRecord {
  std::string image_id;
  std::vector<FiveTuple> tuples;
};

void write_predictions(const std::string& path,
                       const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> load_predictions(const std::string& path);

}  // namespace wsg
