#include "fallpred/forces/force_profile.hpp"

#include <cmath>

#include "fallpred/error.hpp"

namespace fallpred::forces {

std::string_view to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::prelude_only: return "prelude";
    case FaultKind::abrupt: return "abrupt";
    case FaultKind::incipient: return "incipient";
    case FaultKind::intermittent: return "intermittent";
  }
  return "unknown";
}

FaultKind parse_fault_kind(std::string_view name) {
  if (name == "prelude") return FaultKind::prelude_only;
  if (name == "abrupt") return FaultKind::abrupt;
  if (name == "incipient") return FaultKind::incipient;
  if (name == "intermittent") return FaultKind::intermittent;
  throw DataError("unknown fault kind '" + std::string(name) + "'");
}

void ForceProfile::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw DataError(std::string("invalid force profile: ") + what);
  };
  require(perturbation_amplitude >= 0 && amplitude >= 0 && second_amplitude >= 0,
          "amplitudes must be non-negative");
  require(perturbation_duration > 0 && impulse_duration > 0, "impulse duration must be positive");
  require(slope > 0, "trapezoid slope must be positive");
  require(hold >= 0, "hold duration must be non-negative");
  if (!has_fault()) return;
  const double onset = fault_start - perturbation_start;
  require(onset >= 2.0 - 1e-9 && onset <= 2.5 + 1e-9, "fault onset must be 2.0-2.5 s after perturbation");
  require(first_kind == FaultKind::abrupt || first_kind == FaultKind::incipient,
          "fault shape must be abrupt or incipient");
  if (kind == FaultKind::intermittent) {
    require(gap >= 1.0 - 1e-9 && gap <= 2.5 + 1e-9, "intermittent gap must be within [1.0, 2.5] s");
    require(second_kind == FaultKind::abrupt || second_kind == FaultKind::incipient,
            "second fault must be abrupt or incipient");
  } else {
    require(kind == first_kind, "single-fault profile kind must match its fault shape");
  }
}

double impulse_force(double start, double amplitude, double duration, double t) {
  return (t >= start && t < start + duration) ? amplitude : 0.0;
}

double trapezoid_force(double start, double amplitude, double slope, double hold, double t) {
  if (amplitude <= 0.0 || t < start) return 0.0;
  const double ramp = amplitude / slope;
  const double s = t - start;
  if (s < ramp) return slope * s;
  if (s < ramp + hold) return amplitude;
  if (s < 2.0 * ramp + hold) return amplitude - slope * (s - ramp - hold);
  return 0.0;
}

namespace {

double single_fault(FaultKind shape, double start, double amplitude, const ForceProfile& p, double t) {
  if (shape == FaultKind::incipient) return trapezoid_force(start, amplitude, p.slope, p.hold, t);
  return impulse_force(start, amplitude, p.impulse_duration, t);
}

double single_impulse(FaultKind shape, double amplitude, const ForceProfile& p) {
  if (shape == FaultKind::incipient) return amplitude * (p.hold + amplitude / p.slope);
  return amplitude * p.impulse_duration;
}

}  // namespace

double fault_force_at(const ForceProfile& profile, double t) {
  if (!profile.has_fault()) return 0.0;
  double f = single_fault(profile.first_kind, profile.fault_start, profile.amplitude, profile, t);
  if (profile.kind == FaultKind::intermittent) {
    f += single_fault(profile.second_kind, profile.second_fault_start(), profile.second_amplitude, profile, t);
  }
  return f;
}

double force_at(const ForceProfile& profile, double t) {
  return impulse_force(profile.perturbation_start, profile.perturbation_amplitude,
                       profile.perturbation_duration, t) +
         fault_force_at(profile, t);
}

double fault_impulse(const ForceProfile& profile) {
  if (!profile.has_fault()) return 0.0;
  double j = single_impulse(profile.first_kind, profile.amplitude, profile);
  if (profile.kind == FaultKind::intermittent) {
    j += single_impulse(profile.second_kind, profile.second_amplitude, profile);
  }
  return j;
}

std::pair<ForceProfile, ForceProfile> split_intermittent(const ForceProfile& profile) {
  if (profile.kind != FaultKind::intermittent) throw DataError("split_intermittent: profile is not intermittent");
  ForceProfile first = profile;
  first.kind = profile.first_kind;
  first.perturbation_amplitude = 0.0;
  first.gap = 0.0;
  first.second_amplitude = 0.0;

  ForceProfile second = first;
  second.kind = profile.second_kind;
  second.first_kind = profile.second_kind;
  second.fault_start = profile.second_fault_start();
  second.amplitude = profile.second_amplitude;
  return {first, second};
}

double ForceRanges::bound(FaultKind kind) const {
  switch (kind) {
    case FaultKind::abrupt: return abrupt_bound;
    case FaultKind::incipient: return incipient_bound;
    case FaultKind::prelude_only: return prelude_bound;
    case FaultKind::intermittent: break;
  }
  throw DataError("no single amplitude range for intermittent faults");
}

double ForceRanges::boundary(FaultKind kind) const {
  switch (kind) {
    case FaultKind::abrupt: return abrupt_boundary;
    case FaultKind::incipient: return incipient_boundary;
    default: break;
  }
  throw DataError("fall boundary is defined for abrupt and incipient faults only");
}

void ForceRanges::validate() const {
  const bool ok = abrupt_bound > 0 && incipient_bound > 0 && prelude_bound >= 0 && abrupt_boundary > 0 &&
                  incipient_boundary > 0 && abrupt_boundary <= abrupt_bound &&
                  incipient_boundary <= incipient_bound;
  if (!ok) throw DataError("invalid force ranges");
}

namespace {

double grid_draw(Rng& rng, double lo, double hi, double grid) {
  const auto steps = static_cast<std::uint64_t>(std::llround((hi - lo) / grid));
  return lo + static_cast<double>(rng.below(steps + 1)) * grid;
}

FaultKind draw_shape(Rng& rng) { return rng.below(2) == 0 ? FaultKind::abrupt : FaultKind::incipient; }

}  // namespace

ForceProfile sample_profile(FaultKind kind, Rng& rng, const ForceRanges& ranges, const TimingSpec& timing) {
  ranges.validate();
  ForceProfile p;
  p.kind = kind;
  p.perturbation_start = timing.perturbation_start;
  p.perturbation_amplitude = rng.uniform(0.0, ranges.prelude_bound);
  p.fault_start = timing.perturbation_start + grid_draw(rng, timing.onset_min, timing.onset_max, timing.grid);

  switch (kind) {
    case FaultKind::prelude_only:
      p.fault_start = 0.0;
      break;
    case FaultKind::abrupt:
    case FaultKind::incipient:
      p.first_kind = kind;
      p.amplitude = rng.uniform(0.0, ranges.bound(kind));
      break;
    case FaultKind::intermittent:
      // the first push stays below its fall boundary; the second may or may not topple the robot
      p.first_kind = draw_shape(rng);
      p.amplitude = rng.uniform(0.0, ranges.boundary(p.first_kind));
      p.gap = grid_draw(rng, timing.gap_min, timing.gap_max, timing.grid);
      p.second_kind = draw_shape(rng);
      p.second_amplitude = rng.uniform(0.0, ranges.bound(p.second_kind));
      break;
  }
  return p;
}

}  // namespace fallpred::forces
