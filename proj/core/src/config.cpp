#include "wsg/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace wsg {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError("config: not a boolean: " + v);
}

}  // namespace

int PipelineConfig::max_k() const {
  return *std::max_element(recall_ks.begin(), recall_ks.end());
}

void PipelineConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InputError("config: " + what);
  };
  require(dim > 0, "d must be positive");
  require(d_cnn > 0, "d_cnn must be positive");
  require(max_proposals > 0, "n_v must be positive");
  require(refine_iters >= 0, "n_t must be >= 0");
  require(phrasal_depth > 0, "phrasal_depth must be positive");
  require(beta > 0.0 && beta <= 1.0, "beta must be in (0,1]");
  require(batch_size > 0, "batch_size must be positive");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(weight_decay >= 0.0, "weight_decay must be >= 0");
  require(beam_width >= 1, "beam_width must be >= 1");
  require(lstm_hidden > 0, "lstm_hidden must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0,1)");
  require(nms.score_threshold >= 0.0 && nms.score_threshold <= 1.0,
          "nms score threshold must be in [0,1]");
  require(nms.iou_threshold >= 0.0 && nms.iou_threshold <= 1.0,
          "nms IoU threshold must be in [0,1]");
  require(nms.max_per_class >= 1, "nms max per class must be >= 1");
  require(!recall_ks.empty(), "at least one K value required");
  for (int k : recall_ks) require(k >= 1, "K values must be >= 1");
  require(max_steps >= 0, "max_steps must be >= 0");
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (key == "d") dim = std::stoi(value);
  else if (key == "d_cnn") d_cnn = std::stoi(value);
  else if (key == "n_v") max_proposals = std::stoi(value);
  else if (key == "n_t") refine_iters = std::stoi(value);
  else if (key == "phrasal_depth") phrasal_depth = std::stoi(value);
  else if (key == "phrasal") phrasal = parse_bool(value);
  else if (key == "sequential") sequential = parse_bool(value);
  else if (key == "beta") beta = std::stod(value);
  else if (key == "batch_size") batch_size = std::stoi(value);
  else if (key == "learning_rate") learning_rate = std::stod(value);
  else if (key == "weight_decay") weight_decay = std::stod(value);
  else if (key == "beam_width") beam_width = std::stoi(value);
  else if (key == "lstm_hidden") lstm_hidden = std::stoi(value);
  else if (key == "dropout") dropout = std::stod(value);
  else if (key == "nms_score_threshold") nms.score_threshold = std::stod(value);
  else if (key == "nms_iou_threshold") nms.iou_threshold = std::stod(value);
  else if (key == "nms_max_per_class") nms.max_per_class = std::stoi(value);
  else if (key == "seed") seed = std::stoull(value);
  else if (key == "max_steps") max_steps = std::stol(value);
  else if (key == "k") {
    recall_ks.clear();
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!trim(part).empty()) recall_ks.push_back(std::stoi(trim(part)));
  } else {
    throw InputError("config: unknown key '" + key + "'");
  }
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open config file: " + path);
  PipelineConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError("config line " + std::to_string(lineno) +
                       ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace wsg
