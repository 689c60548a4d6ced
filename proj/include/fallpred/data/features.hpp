#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fallpred/sim/episode.hpp"

namespace fallpred::data {

/// base: CoM relative to mid-toe (x, z), CoM velocity (x, z), sagittal joint
/// angles and velocities. extended: base plus joint torques and the contact
/// point, which is averaged over each window when windows are built.
enum class FeatureVariant { base, extended };

std::string_view to_string(FeatureVariant variant);
FeatureVariant parse_feature_variant(std::string_view name);

constexpr std::size_t kSagittalJoints = 2;

constexpr std::size_t feature_dim(FeatureVariant variant) {
  const std::size_t base = 2 + 2 + kSagittalJoints + kSagittalJoints;
  return variant == FeatureVariant::base ? base : base + kSagittalJoints + 1;
}

/// Column holding the contact point in the extended variant.
constexpr std::size_t kContactColumn = feature_dim(FeatureVariant::extended) - 1;

std::vector<std::string> feature_names(FeatureVariant variant);

using FeatureVector = std::vector<double>;

/// Throws DataError on non-finite state values.
FeatureVector extract_features(const sim::RobotState& state, FeatureVariant variant);

/// Per-sample features of one trajectory, row-major (samples x dim).
struct FeatureSeries {
  FeatureVariant variant = FeatureVariant::base;
  std::size_t dim = 0;
  std::size_t length = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

FeatureSeries extract_series(const sim::Trajectory& traj, FeatureVariant variant);

}  // namespace fallpred::data
