#include "fallpred/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fallpred/error.hpp"

namespace fallpred::nn {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::bce: return "bce";
    case LossKind::ce: return "ce";
    case LossKind::mse: return "mse";
  }
  return "unknown";
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sum_exp(std::span<const double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - top);
  return top + std::log(sum);
}

namespace {

void check_inputs(LossKind kind, std::span<const double> prediction, double target) {
  for (double v : prediction) {
    if (!std::isfinite(v)) throw ModelError("non-finite prediction passed to " + std::string(to_string(kind)) + " loss");
  }
  switch (kind) {
    case LossKind::bce:
      if (prediction.size() != 1) throw ModelError("bce loss expects a single logit");
      if (target != 0.0 && target != 1.0) throw ModelError("bce target must be 0 or 1");
      break;
    case LossKind::ce: {
      if (prediction.size() < 2) throw ModelError("ce loss expects at least two logits");
      const double cls = std::floor(target);
      if (cls != target || cls < 0 || cls >= static_cast<double>(prediction.size())) {
        throw ModelError("ce target must be a class index");
      }
      break;
    }
    case LossKind::mse:
      if (prediction.size() != 1) throw ModelError("mse loss expects a single prediction");
      if (!std::isfinite(target)) throw ModelError("mse target must be finite");
      break;
  }
}

}  // namespace

double loss_and_grad(LossKind kind, std::span<const double> p, double target, std::span<double> grad) {
  check_inputs(kind, p, target);
  switch (kind) {
    case LossKind::bce: {
      const double z = p[0];
      // max(z,0) - z*y + log(1 + exp(-|z|))
      const double value = std::max(z, 0.0) - z * target + std::log1p(std::exp(-std::abs(z)));
      if (!grad.empty()) grad[0] = sigmoid(z) - target;
      return value;
    }
    case LossKind::ce: {
      const double lse = log_sum_exp(p);
      const auto cls = static_cast<std::size_t>(target);
      if (!grad.empty()) {
        for (std::size_t i = 0; i < p.size(); ++i) grad[i] = std::exp(p[i] - lse) - (i == cls ? 1.0 : 0.0);
      }
      return lse - p[cls];
    }
    case LossKind::mse: {
      const double diff = p[0] - target;
      if (!grad.empty()) grad[0] = 2.0 * diff;
      return diff * diff;
    }
  }
  return 0.0;
}

double loss(LossKind kind, std::span<const double> prediction, double target) {
  return loss_and_grad(kind, prediction, target, {});
}

}  // namespace fallpred::nn
