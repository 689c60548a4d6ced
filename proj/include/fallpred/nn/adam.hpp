#pragma once

#include <cstdint>
#include <vector>

#include "fallpred/nn/network.hpp"

namespace fallpred::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment optimizer with bias-corrected first and second moments.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// Applies one update to every non-frozen tensor. Throws ModelError naming
  /// the parameter if a gradient is non-finite or shapes differ.
  void step(ParamSet& params, const ParamSet& grads);

  std::int64_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::int64_t steps_ = 0;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
};

}  // namespace fallpred::nn
