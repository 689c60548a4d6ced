#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fallpred/nn/network.hpp"
#include "fallpred/rng.hpp"

namespace fallpred::testing {

/// Random network of the conv -> pool -> dense -> dense shape, with random
/// sizes kept small enough for exhaustive finite differences.
inline nn::NetworkSpec random_spec(Rng& rng, nn::LossKind loss) {
  nn::NetworkSpec s;
  s.window_length = 8 + rng.below(25);
  s.channels = 1 + rng.below(11);
  s.filters = 1 + rng.below(8);
  s.kernel = 1 + rng.below(6);
  s.stride = 1 + rng.below(2);
  s.pool = 1 + rng.below(3);
  s.hidden = 1 + rng.below(16);
  s.outputs = loss == nn::LossKind::ce ? 2 + rng.below(3) : 1;
  s.output = loss == nn::LossKind::mse && rng.below(2) ? nn::OutputActivation::sigmoid : nn::OutputActivation::none;
  s.validate();
  return s;
}

inline double random_target(Rng& rng, const nn::NetworkSpec& s, nn::LossKind loss) {
  switch (loss) {
    case nn::LossKind::bce: return static_cast<double>(rng.below(2));
    case nn::LossKind::ce: return static_cast<double>(rng.below(s.outputs));
    case nn::LossKind::mse: return rng.uniform();
  }
  return 0.0;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t kinks = 0;  // parameters whose one-sided slopes disagree (ReLU or max-pool switch)
};

/// Compares backward() against central differences for every parameter.
/// Relative error is |a - n| / max(|a|, |n|, floor).
inline GradCheck gradient_check(nn::Network& net, const std::vector<double>& x, double target, nn::LossKind loss,
                                double eps = 1e-5, double floor = 1e-6) {
  nn::ParamSet grads = net.params().zeros_like();
  nn::Workspace ws;
  net.backward(x, target, loss, grads, ws);
  auto f = [&] { return nn::loss(loss, net.forward(x, ws), target); };

  GradCheck r;
  for (std::size_t ti = 0; ti < net.params().tensors.size(); ++ti) {
    auto& values = net.params().tensors[ti].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double keep = values[i];
      const double f0 = f();
      values[i] = keep + eps;
      const double fp = f();
      values[i] = keep - eps;
      const double fm = f();
      values[i] = keep;
      const double numeric = (fp - fm) / (2 * eps);
      const double analytic = grads.tensors[ti].values[i];
      const double right = (fp - f0) / eps, left = (f0 - fm) / eps;
      if (std::abs(right - left) > 1e-3 * std::max({std::abs(right), std::abs(left), floor})) {
        ++r.kinks;
        continue;
      }
      const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
      r.max_rel_error = std::max(r.max_rel_error, rel);
      ++r.checked;
    }
  }
  return r;
}

}  // namespace fallpred::testing
