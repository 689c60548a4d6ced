#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fallpred/forces/force_profile.hpp"
#include "fallpred/time.hpp"

namespace fallpred::eval {

/// What a detector did on one trajectory, together with its ground truth.
struct DetectionOutcome {
  std::uint64_t id = 0;
  forces::FaultKind kind = forces::FaultKind::prelude_only;
  std::optional<Micros> fault_time;
  std::optional<Micros> fall_time;
  std::optional<Micros> detection;      // first flagged window end
  std::optional<double> predicted_lead; // pipeline lead estimate at detection, seconds
};

struct TrajectoryVerdict {
  std::uint64_t id = 0;
  forces::FaultKind kind = forces::FaultKind::prelude_only;
  bool unsafe = false;
  std::optional<Micros> detection;
  std::optional<Micros> lead;      // t_fall - detection, detected unsafe only
  std::optional<double> predicted_lead;
  std::optional<Micros> response;  // detection - t_ft; absent for intermittent faults

  bool false_positive() const { return !unsafe && detection.has_value(); }
  bool false_negative() const { return unsafe && !detection.has_value(); }
};

TrajectoryVerdict make_verdict(const DetectionOutcome& outcome);

/// Fraction of safe trajectories with at least one detection (0 if none are safe).
double false_positive_rate(std::span<const TrajectoryVerdict> verdicts);
/// Fraction of unsafe trajectories never flagged (0 if none are unsafe).
double false_negative_rate(std::span<const TrajectoryVerdict> verdicts);
/// Mean lead over detected unsafe trajectories, seconds; 0 when there are none.
double mean_lead(std::span<const TrajectoryVerdict> verdicts);

}  // namespace fallpred::eval
