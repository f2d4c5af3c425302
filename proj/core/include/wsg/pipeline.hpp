#pragma once

#include <string>
#include <vector>

#include "wsg/model.hpp"

namespace wsg {

/// Multi-task training loop: seeded shuffling, fixed-size batches (partial
/// final batch processed), one Adam step per batch. Writes a CSV loss trace
/// (step, components, total) to `trace_path` when nonempty. Deterministic
/// given the seed.
void train_model(Model& model, const std::vector<ImageRecord>& dataset,
                 const std::string& trace_path);

/// Caption-free inference over a dataset, ordered by input record order.
std::vector<PredictionRecord> infer_dataset(
    const Model& model, const std::vector<ImageRecord>& dataset);

struct EvalRow {
  std::string image_id;
  int num_gt = 0;
  std::vector<double> recalls;  // one per K
};

struct EvalReport {
  std::vector<int> ks;
  std::vector<EvalRow> rows;            // images with >= 1 GT triplet
  std::vector<std::string> empty_gt;    // flagged, excluded from averages
  std::vector<std::string> missing_ids; // predictions without a GT record
  std::vector<double> macro;            // per K
  std::vector<double> micro;            // per K

  /// Tab-separated rows plus macro/micro averages and a footer of
  /// missing/empty-GT image ids.
  std::string to_tsv() const;
};

EvalReport evaluate_predictions(const std::vector<PredictionRecord>& predictions,
                                const std::vector<ImageRecord>& gt_dataset,
                                const std::vector<int>& ks);

/// Named finite-difference check over one learned module's loss.
struct GradCheckResult {
  std::string module;
  double max_rel_error;
  bool passed;
};

/// Runs the per-module gradient suites on seeded small shapes
/// (n_v=6, n_e=3, n_r=2, c_e=5, c_r=4, d=8, d_cnn=12) and returns one
/// result per learned module. Threshold 1e-3, eps 1e-4.
std::vector<GradCheckResult> run_gradient_suite(uint64_t seed);

}  // namespace wsg
