#pragma once

#include <span>
#include <string_view>

namespace fallpred::nn {

enum class LossKind { bce, ce, mse };

std::string_view to_string(LossKind kind);

/// bce and ce take raw logits (one for bce, one per class for ce); targets are
/// 0/1 for bce and a class index for ce. mse takes the prediction itself.
/// Throws ModelError on non-finite predictions or invalid targets.
double loss(LossKind kind, std::span<const double> prediction, double target);

/// Loss value; writes d loss / d prediction into `grad`.
double loss_and_grad(LossKind kind, std::span<const double> prediction, double target, std::span<double> grad);

double sigmoid(double z);
/// Numerically stable log(sum(exp(z))).
double log_sum_exp(std::span<const double> z);

}  // namespace fallpred::nn
