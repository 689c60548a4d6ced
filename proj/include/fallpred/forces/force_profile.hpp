#pragma once

#include <string>
#include <string_view>
#include <utility>

#include "fallpred/rng.hpp"

namespace fallpred::forces {

enum class FaultKind { prelude_only, abrupt, incipient, intermittent };

std::string_view to_string(FaultKind kind);
FaultKind parse_fault_kind(std::string_view name);

/// Horizontal push schedule applied at the torso. Every profile starts with a
/// short oscillation-inducing impulse, followed by zero, one or two faults.
/// Times are in seconds from episode start, forces in newtons.
struct ForceProfile {
  FaultKind kind = FaultKind::prelude_only;

  double perturbation_start = 0.0;
  double perturbation_amplitude = 0.0;
  double perturbation_duration = 0.075;

  // First (or only) fault.
  FaultKind first_kind = FaultKind::abrupt;
  double fault_start = 0.0;
  double amplitude = 0.0;

  // Shared shape parameters.
  double impulse_duration = 0.075;
  double slope = 480.0;
  double hold = 1.0;

  // Intermittent profiles only.
  double gap = 0.0;
  FaultKind second_kind = FaultKind::abrupt;
  double second_amplitude = 0.0;

  bool has_fault() const { return kind != FaultKind::prelude_only; }
  double second_fault_start() const { return fault_start + gap; }

  /// Throws DataError when an invariant is violated.
  void validate() const;
};

/// Rectangular pulse: `amplitude` on [start, start + duration), zero elsewhere.
double impulse_force(double start, double amplitude, double duration, double t);

/// Symmetric trapezoid: ramp up at `slope` until `amplitude` is reached, hold
/// for `hold` seconds, ramp down at the same slope.
double trapezoid_force(double start, double amplitude, double slope, double hold, double t);

/// Total force of the schedule at time t (prelude plus all faults).
double force_at(const ForceProfile& profile, double t);

/// Force contributed by the fault(s) only, without the prelude.
double fault_force_at(const ForceProfile& profile, double t);

/// Closed-form impulse (integral of force over time) of the fault part.
double fault_impulse(const ForceProfile& profile);

/// For intermittent profiles, the two single-fault components with the prelude
/// removed; their pointwise sum equals fault_force_at().
std::pair<ForceProfile, ForceProfile> split_intermittent(const ForceProfile& profile);

/// Upper bounds of the uniform amplitude ranges, plus the fall boundaries they
/// were derived from.
struct ForceRanges {
  double abrupt_bound = 414.8;
  double incipient_bound = 57.6;
  double prelude_bound = 202.4;
  double abrupt_boundary = 207.4;
  double incipient_boundary = 28.8;

  double bound(FaultKind kind) const;
  double boundary(FaultKind kind) const;
  void validate() const;
};

/// Reference ranges reported for the full-size robot; only documentation, the
/// simulator calibrates its own.
inline constexpr ForceRanges kReferenceRanges{};

/// Timing of the schedule. Onset and gap are drawn on a `grid` so that fault
/// times coincide with sensor samples.
struct TimingSpec {
  double perturbation_start = 0.0;
  double onset_min = 2.0;  // after perturbation start
  double onset_max = 2.5;
  double gap_min = 1.0;
  double gap_max = 2.5;
  double grid = 0.01;
};

ForceProfile sample_profile(FaultKind kind, Rng& rng, const ForceRanges& ranges,
                            const TimingSpec& timing = {});

}  // namespace fallpred::forces
