#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "wsg/matrix.hpp"

namespace wsg {

/// Per-parameter Adam accumulators.
struct AdamState {
  Matrix m;
  Matrix v;
  long step = 0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One Adam update on a single parameter. Decoupled weight decay
/// (value -= lr * weight_decay * value) is applied after the moment update.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr,
               double weight_decay, const AdamConfig& cfg = {});

/// Named trainable parameters with their gradients and optimizer state.
/// Registration order is fixed and defines checkpoint layout.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Matrix value;
    Matrix grad;
    AdamState opt;
    bool weight_decay;  // decoupled decay applies to FC weights only
  };

  int add(std::string name, Matrix value, bool weight_decay);
  int index_of(const std::string& name) const;
  Entry& entry(int i) { return entries_[i]; }
  const Entry& entry(int i) const { return entries_[i]; }
  int count() const { return static_cast<int>(entries_.size()); }

  void zero_grads();
  void step(double lr, double weight_decay, const AdamConfig& cfg = {});

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> by_name_;
};

}  // namespace wsg
