#include "fallpred/sim/episode.hpp"

#include <cmath>
#include <string>

namespace fallpred::sim {

using forces::FaultKind;
using forces::ForceProfile;

double SimConfig::fall_threshold(const RobotParams& params) const {
  if (fall_height_fraction) return *fall_height_fraction * params.nominal_com_height();
  return fall_height;
}

void SimConfig::validate(const RobotParams& params) const {
  const double h = fall_threshold(params);
  if (!(h > 0 && h < params.nominal_com_height())) {
    throw ConfigError("fall height must lie strictly between 0 and the nominal CoM height");
  }
  if (!(duration > 0)) throw ConfigError("episode duration must be positive");
  if (!(retention_delay >= 0)) throw ConfigError("retention delay must be non-negative");
}

double schedule_end(const ForceProfile& p) {
  double end = p.perturbation_start + p.perturbation_duration;
  auto fault_end = [&](FaultKind shape, double start, double amplitude) {
    if (shape == FaultKind::incipient) return start + 2.0 * amplitude / p.slope + p.hold;
    return start + p.impulse_duration;
  };
  if (p.has_fault()) end = std::max(end, fault_end(p.first_kind, p.fault_start, p.amplitude));
  if (p.kind == FaultKind::intermittent) {
    end = std::max(end, fault_end(p.second_kind, p.second_fault_start(), p.second_amplitude));
  }
  return end;
}

Trajectory run_episode(const ForceProfile& profile, const RobotParams& params, const SimConfig& config) {
  params.validate();
  config.validate(params);
  profile.validate();
  if (schedule_end(profile) > config.duration) {
    throw DataError("force schedule does not fit inside the episode duration");
  }

  const Micros dt_us = to_micros(params.dt);
  const int per_sample = params.steps_per_sample();
  const double fall_height = config.fall_threshold(params);
  const Micros retain_from = to_micros(profile.perturbation_start + config.retention_delay);
  const auto total_steps = static_cast<std::int64_t>(std::llround(config.duration / params.dt));

  Trajectory traj;
  traj.seed = config.seed;
  traj.profile = profile;
  traj.sample_period = dt_us * per_sample;
  if (profile.has_fault()) traj.fault_time = to_micros(profile.fault_start);

  RobotState state = upright_state(params);
  bool started = false;
  for (std::int64_t k = 0; k <= total_steps; ++k) {
    const Micros now = k * dt_us;
    state.t = static_cast<double>(k) * params.dt;
    if (k % per_sample == 0 && now >= retain_from) {
      if (!started) {
        traj.start_time = now;
        started = true;
      }
      traj.samples.push_back(state);
    }
    if (state.fallen) {
      traj.fall_time = now;
      break;
    }
    if (k == total_steps) break;
    try {
      state = step(state, forces::force_at(profile, state.t), params, fall_height);
    } catch (const SimulationDiverged& e) {
      throw EpisodeDiverged(e.what(), std::move(traj));
    }
  }
  if (!started) traj.start_time = retain_from;
  return traj;
}

ForceProfile calibration_probe(FaultKind shape, double amplitude) {
  ForceProfile p;
  p.kind = shape;
  p.first_kind = shape;
  p.perturbation_amplitude = 0.0;
  // fixed onset in the middle of the sampling window, on the sensor grid
  p.fault_start = p.perturbation_start + 2.25;
  p.amplitude = amplitude;
  return p;
}

namespace {

bool falls(FaultKind shape, double amplitude, const RobotParams& params, const SimConfig& config) {
  return run_episode(calibration_probe(shape, amplitude), params, config).unsafe();
}

}  // namespace

double find_fall_boundary(FaultKind shape, const RobotParams& params, const SimConfig& config) {
  if (shape != FaultKind::abrupt && shape != FaultKind::incipient) {
    throw CalibrationFailed("fall boundary is only defined for abrupt and incipient faults");
  }
  // largest amplitude whose schedule still fits inside the episode
  double cap = 1e5;
  if (shape == FaultKind::incipient) {
    const ForceProfile probe = calibration_probe(shape, 0.0);
    cap = std::min(cap, 0.5 * (config.duration - probe.fault_start - probe.hold) * probe.slope);
  }

  double lo = 0.0;
  double hi = std::min(10.0, cap);
  while (!falls(shape, hi, params, config)) {
    lo = hi;
    if (hi >= cap) {
      throw CalibrationFailed(std::string("no ") + std::string(forces::to_string(shape)) +
                              " amplitude up to " + std::to_string(cap) + " N causes a fall");
    }
    hi = std::min(2.0 * hi, cap);
  }
  while (hi - lo > 1e-5 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (falls(shape, mid, params, config)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

forces::ForceRanges calibrate_force_ranges(const RobotParams& params, const SimConfig& config) {
  forces::ForceRanges r;
  r.abrupt_boundary = find_fall_boundary(FaultKind::abrupt, params, config);
  r.incipient_boundary = find_fall_boundary(FaultKind::incipient, params, config);
  r.abrupt_bound = 2.0 * r.abrupt_boundary;
  r.incipient_bound = 2.0 * r.incipient_boundary;
  r.prelude_bound = r.abrupt_bound * (forces::kReferenceRanges.prelude_bound / forces::kReferenceRanges.abrupt_bound);
  return r;
}

}  // namespace fallpred::sim
