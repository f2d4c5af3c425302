#include "wsg/dataset.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

namespace wsg {

using nlohmann::json;

namespace {

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4)
    throw InputError("box must be [x1,y1,x2,y2]");
  Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
        j[3].get<double>()};
  if (!b.valid()) throw InputError("box has non-positive area");
  return b;
}

/// Builds a TextGraph from a graph JSON object, dropping out-of-vocab
/// entities/relations (counting them) and re-indexing.
TextGraph graph_from_json(const json& j, const Vocab& vocab,
                          DatasetWarnings* warnings) {
  TextGraph g;
  std::vector<int> remap;  // original entity index -> new index or -1
  if (j.contains("entities")) {
    for (const auto& e : j.at("entities")) {
      const std::string name = e.get<std::string>();
      int id = vocab.entity_id(name);
      if (id < 0) {
        remap.push_back(-1);
        if (warnings) ++warnings->dropped_entities;
      } else {
        remap.push_back(g.num_entities());
        g.entities.push_back(id);
      }
    }
  }
  if (j.contains("relations")) {
    for (const auto& r : j.at("relations")) {
      if (!r.is_array() || r.size() != 3)
        throw InputError("relation must be [rel, subj_idx, obj_idx]");
      int rel = vocab.relation_id(r[0].get<std::string>());
      int s = r[1].get<int>();
      int o = r[2].get<int>();
      if (s < 0 || s >= static_cast<int>(remap.size()) || o < 0 ||
          o >= static_cast<int>(remap.size()))
        throw InputError("relation endpoint index out of range");
      if (rel < 0 || remap[s] < 0 || remap[o] < 0 || remap[s] == remap[o]) {
        if (warnings) ++warnings->dropped_relations;
        continue;
      }
      g.relations.push_back({rel, remap[s], remap[o]});
    }
  }
  if (j.contains("attributes")) {
    for (const auto& a : j.at("attributes")) {
      if (!a.is_array() || a.size() != 2)
        throw InputError("attribute must be [word, entity_idx]");
      const std::string word = a[0].get<std::string>();
      int head = a[1].get<int>();
      if (head < 0 || head >= static_cast<int>(remap.size()) || remap[head] < 0)
        continue;
      int id = vocab.entity_id(word);
      if (id >= 0) {
        // in-vocab attribute becomes a regular entity node
        int node = -1;
        for (int i = 0; i < g.num_entities(); ++i)
          if (g.entities[i] == id) node = i;
        if (node < 0) {
          g.entities.push_back(id);
          node = g.num_entities() - 1;
        }
        if (node != remap[head]) g.attr_edges.push_back({node, remap[head]});
      } else {
        g.oov_attrs.push_back({word, remap[head]});
      }
    }
  }
  return g;
}

json graph_to_json(const TextGraph& g, const Vocab& vocab) {
  json j;
  j["entities"] = json::array();
  for (int e : g.entities) j["entities"].push_back(vocab.entity_name(e));
  j["relations"] = json::array();
  for (const Relation& r : g.relations)
    j["relations"].push_back({vocab.relation_name(r.rel), r.subj, r.obj});
  json attrs = json::array();
  for (const AttrEdge& a : g.attr_edges)
    attrs.push_back({vocab.entity_name(g.entities[a.attr_node]), a.head_node});
  for (const OovAttribute& a : g.oov_attrs)
    attrs.push_back({a.lemma, a.head_node});
  if (!attrs.empty()) j["attributes"] = attrs;
  return j;
}

GroundTruthTriplet gt_from_json(const json& j, const Vocab& vocab) {
  GroundTruthTriplet t;
  t.s_e = vocab.entity_id(j.at("subject").get<std::string>());
  t.p_r = vocab.relation_id(j.at("predicate").get<std::string>());
  t.o_e = vocab.entity_id(j.at("object").get<std::string>());
  if (t.s_e < 0 || t.p_r < 0 || t.o_e < 0)
    throw InputError("ground-truth triplet class outside vocab");
  t.subj_box = box_from_json(j.at("subject_box"));
  t.obj_box = box_from_json(j.at("object_box"));
  return t;
}

struct SidecarEntry {
  uint32_t rows;
  uint32_t cols;
  std::streampos offset;
};

std::unordered_map<std::string, SidecarEntry> index_sidecar(std::ifstream& is,
                                                            const std::string& path) {
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4 || std::memcmp(magic, "WSGF", 4) != 0)
    throw InputError("bad feature sidecar magic in " + path);
  std::unordered_map<std::string, SidecarEntry> idx;
  uint32_t idlen;
  while (is.read(reinterpret_cast<char*>(&idlen), 4)) {
    std::string id(idlen, '\0');
    is.read(id.data(), idlen);
    uint32_t rows, cols;
    is.read(reinterpret_cast<char*>(&rows), 4);
    is.read(reinterpret_cast<char*>(&cols), 4);
    if (!is) throw InputError("truncated feature sidecar: " + path);
    idx[id] = {rows, cols, is.tellg()};
    is.seekg(static_cast<std::streamoff>(rows) * cols * 4, std::ios::cur);
  }
  is.clear();
  return idx;
}

}  // namespace

std::vector<ImageRecord> load_dataset(const std::string& path,
                                      const Vocab& vocab, int max_proposals,
                                      DatasetWarnings* warnings) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open dataset: " + path);

  std::ifstream sidecar_is(path + ".feat", std::ios::binary);
  std::unordered_map<std::string, SidecarEntry> sidecar;
  const bool has_sidecar = static_cast<bool>(sidecar_is);
  if (has_sidecar) sidecar = index_sidecar(sidecar_is, path + ".feat");

  std::vector<ImageRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      ImageRecord rec;
      rec.image_id = j.at("image_id").get<std::string>();
      for (const auto& b : j.at("boxes"))
        rec.proposals.boxes.push_back(box_from_json(b));
      const int n_v_all = static_cast<int>(rec.proposals.boxes.size());

      if (j.contains("features")) {
        const auto& feats = j.at("features");
        if (static_cast<int>(feats.size()) != n_v_all)
          throw InputError("feature row count != box count");
        const int d = feats.empty() ? 0 : static_cast<int>(feats[0].size());
        rec.proposals.features = Matrix(n_v_all, d);
        for (int i = 0; i < n_v_all; ++i) {
          if (static_cast<int>(feats[i].size()) != d)
            throw InputError("ragged feature rows");
          for (int k = 0; k < d; ++k)
            rec.proposals.features.at(i, k) = feats[i][k].get<double>();
        }
      } else if (has_sidecar) {
        auto it = sidecar.find(rec.image_id);
        if (it == sidecar.end())
          throw InputError("image id missing from feature sidecar");
        if (static_cast<int>(it->second.rows) != n_v_all)
          throw InputError("sidecar feature rows != box count");
        rec.proposals.features =
            Matrix(static_cast<int>(it->second.rows),
                   static_cast<int>(it->second.cols));
        sidecar_is.seekg(it->second.offset);
        std::vector<float> buf(rec.proposals.features.size());
        sidecar_is.read(reinterpret_cast<char*>(buf.data()),
                        static_cast<std::streamsize>(buf.size() * 4));
        for (size_t k = 0; k < buf.size(); ++k)
          rec.proposals.features[k] = static_cast<double>(buf[k]);
      } else {
        throw InputError("record has no features and no sidecar present");
      }

      if (n_v_all > max_proposals) {
        rec.proposals.boxes.resize(max_proposals);
        Matrix trimmed(max_proposals, rec.proposals.features.cols());
        for (int i = 0; i < max_proposals; ++i)
          for (int k = 0; k < trimmed.cols(); ++k)
            trimmed.at(i, k) = rec.proposals.features.at(i, k);
        rec.proposals.features = std::move(trimmed);
      }
      rec.proposals.validate();

      if (j.contains("captions"))
        for (const auto& c : j.at("captions"))
          rec.captions.push_back(c.get<std::string>());
      if (j.contains("graph"))
        rec.graph = graph_from_json(j.at("graph"), vocab, warnings);
      if (j.contains("gt"))
        for (const auto& t : j.at("gt")) rec.gt.push_back(gt_from_json(t, vocab));
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      if (warnings) ++warnings->skipped_records;
      std::fprintf(stderr, "warning: skipping %s line %d: %s\n", path.c_str(),
                   lineno, e.what());
    }
  }
  return records;
}

void write_feature_sidecar(const std::string& path,
                           const std::vector<ImageRecord>& records) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot open sidecar for writing: " + path);
  os.write("WSGF", 4);
  for (const ImageRecord& rec : records) {
    uint32_t idlen = static_cast<uint32_t>(rec.image_id.size());
    uint32_t rows = static_cast<uint32_t>(rec.proposals.features.rows());
    uint32_t cols = static_cast<uint32_t>(rec.proposals.features.cols());
    os.write(reinterpret_cast<const char*>(&idlen), 4);
    os.write(rec.image_id.data(), idlen);
    os.write(reinterpret_cast<const char*>(&rows), 4);
    os.write(reinterpret_cast<const char*>(&cols), 4);
    for (size_t k = 0; k < rec.proposals.features.size(); ++k) {
      float f = static_cast<float>(rec.proposals.features[k]);
      os.write(reinterpret_cast<const char*>(&f), 4);
    }
  }
}

std::vector<GraphRecord> load_graph_file(const std::string& path,
                                         const Vocab& vocab,
                                         DatasetWarnings* warnings) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open graph file: " + path);
  std::vector<GraphRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    GraphRecord rec;
    rec.image_id = j.at("image_id").get<std::string>();
    rec.graph = graph_from_json(j, vocab, warnings);
    out.push_back(std::move(rec));
  }
  return out;
}

void write_graph_file(const std::string& path,
                      const std::vector<GraphRecord>& records,
                      const Vocab& vocab) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("cannot open graph file for writing: " + path);
  for (const GraphRecord& rec : records) {
    json j = graph_to_json(rec.graph, vocab);
    j["image_id"] = rec.image_id;
    os << j.dump() << "\n";
  }
}

void write_predictions(const std::string& path,
                       const std::vector<PredictionRecord>& records) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("cannot open predictions for writing: " + path);
  for (const PredictionRecord& rec : records) {
    os << "{\"image_id\":" << json(rec.image_id).dump() << ",\"tuples\":[";
    for (size_t i = 0; i < rec.tuples.size(); ++i) {
      const FiveTuple& t = rec.tuples[i];
      char buf[160];
      std::snprintf(buf, sizeof(buf), "[%d,%d,%d,%d,%d,%.17g]", t.s_v, t.o_v,
                    t.s_e, t.p_r, t.o_e, t.score);
      if (i) os << ",";
      os << buf;
    }
    os << "]}\n";
  }
}

std::vector<PredictionRecord> load_predictions(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open predictions: " + path);
  std::vector<PredictionRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    PredictionRecord rec;
    rec.image_id = j.at("image_id").get<std::string>();
    for (const auto& t : j.at("tuples")) {
      if (!t.is_array() || t.size() != 6)
        throw InputError("prediction tuple must have 6 fields");
      rec.tuples.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>(),
                            t[3].get<int>(), t[4].get<int>(),
                            t[5].get<double>()});
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace wsg
