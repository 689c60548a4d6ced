#include "fallpred/nn/adam.hpp"

#include <cmath>

#include "fallpred/error.hpp"

namespace fallpred::nn {

void Adam::step(ParamSet& params, const ParamSet& grads) {
  if (grads.tensors.size() != params.tensors.size()) throw ModelError("gradient set does not match parameters");
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    const Tensor& g = grads.tensors[i];
    if (g.values.size() != params.tensors[i].values.size()) {
      throw ModelError("gradient for '" + params.tensors[i].name + "' has the wrong shape");
    }
    for (double v : g.values) {
      if (!std::isfinite(v)) throw ModelError("non-finite gradient for parameter '" + params.tensors[i].name + "'");
    }
  }
  if (first_.empty()) {
    for (const Tensor& t : params.tensors) {
      first_.emplace_back(t.values.size(), 0.0);
      second_.emplace_back(t.values.size(), 0.0);
    }
  }

  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    Tensor& p = params.tensors[i];
    if (p.frozen) continue;
    const auto& g = grads.tensors[i].values;
    auto& m = first_[i];
    auto& v = second_[i];
    for (std::size_t k = 0; k < p.values.size(); ++k) {
      m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g[k];
      v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g[k] * g[k];
      p.values[k] -= config_.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + config_.epsilon);
    }
  }
}

}  // namespace fallpred::nn
