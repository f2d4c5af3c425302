#include "wsg/adam.hpp"

#include <cmath>

namespace wsg {

void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr,
               double weight_decay, const AdamConfig& cfg) {
  if (!param.same_shape(grad))
    throw ShapeError("adam_step: param " + param.shape_str() + " vs grad " +
                     grad.shape_str());
  if (state.m.empty()) {
    state.m = Matrix(param.rows(), param.cols());
    state.v = Matrix(param.rows(), param.cols());
  }
  if (!state.m.same_shape(param))
    throw ShapeError("adam_step: state shape " + state.m.shape_str() +
                     " vs param " + param.shape_str());
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (size_t k = 0; k < param.size(); ++k) {
    state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * grad[k];
    state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
    const double mhat = state.m[k] / bc1;
    const double vhat = state.v[k] / bc2;
    param[k] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    if (weight_decay != 0.0) param[k] -= lr * weight_decay * param[k];
  }
}

int ParamStore::add(std::string name, Matrix value, bool weight_decay) {
  if (by_name_.count(name))
    throw ContractError("duplicate parameter name: " + name);
  Entry e;
  e.name = name;
  e.grad = Matrix(value.rows(), value.cols());
  e.value = std::move(value);
  e.weight_decay = weight_decay;
  by_name_[e.name] = static_cast<int>(entries_.size());
  entries_.push_back(std::move(e));
  return static_cast<int>(entries_.size()) - 1;
}

int ParamStore::index_of(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

void ParamStore::zero_grads() {
  for (Entry& e : entries_)
    for (size_t k = 0; k < e.grad.size(); ++k) e.grad[k] = 0.0;
}

void ParamStore::step(double lr, double weight_decay, const AdamConfig& cfg) {
  for (Entry& e : entries_)
    adam_step(e.value, e.grad, e.opt, lr, e.weight_decay ? weight_decay : 0.0,
              cfg);
}

}  // namespace wsg
