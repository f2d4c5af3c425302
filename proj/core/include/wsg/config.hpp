#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsg/inference.hpp"

namespace wsg {

struct PipelineConfig {
  int dim = 300;           // embedding width d
  int d_cnn = 1536;        // visual feature width
  int max_proposals = 20;  // n_v cap per image
  int refine_iters = 3;    // n_t
  int phrasal_depth = 2;
  bool phrasal = true;
  bool sequential = true;
  double beta = 0.5;
  int batch_size = 32;
  double learning_rate = 1e-5;
  double weight_decay = 1e-6;
  int beam_width = 5;
  int lstm_hidden = 100;
  double dropout = 0.2;
  NmsConfig nms;
  std::vector<int> recall_ks = {50, 100};
  uint64_t seed = 0;
  long max_steps = 1000;

  int max_k() const;
  void validate() const;

  /// key = value lines, '#' comments. Unknown keys are an InputError.
  static PipelineConfig load(const std::string& path);
  void set(const std::string& key, const std::string& value);
};

}  // namespace wsg
