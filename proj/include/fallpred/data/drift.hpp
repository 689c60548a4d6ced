#pragma once

#include "fallpred/data/features.hpp"

namespace fallpred::data {

/// Subtracts the first retained sample from every sample, for each continuous
/// state field (time and the fallen flag are kept). Every feature is linear in
/// these fields, so features of the corrected trajectory start at zero.
sim::Trajectory drift_correct(const sim::Trajectory& traj);

/// Same correction applied directly to a feature series.
FeatureSeries drift_correct(const FeatureSeries& series);

}  // namespace fallpred::data
