#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fallpred/error.hpp"
#include "fallpred/forces/force_profile.hpp"
#include "fallpred/sim/robot.hpp"
#include "fallpred/time.hpp"

namespace fallpred::sim {

struct SimConfig {
  double fall_height = 0.12;
  /// When set, the fall threshold is this fraction of the nominal CoM height
  /// instead of `fall_height`.
  std::optional<double> fall_height_fraction;
  double duration = 8.0;
  /// Samples earlier than perturbation start + this delay are discarded.
  double retention_delay = 1.0;
  std::uint64_t seed = 0;

  double fall_threshold(const RobotParams& params) const;
  void validate(const RobotParams& params) const;
};

/// Sensor-rate record of one episode. Sample i was taken at
/// start_time + i * sample_period.
struct Trajectory {
  std::uint64_t id = 0;
  std::uint64_t seed = 0;
  forces::ForceProfile profile;
  Micros start_time{0};
  Micros sample_period{10000};
  std::vector<RobotState> samples;
  std::optional<Micros> fault_time;  // first fault onset
  std::optional<Micros> fall_time;   // first integration step with the CoM below the threshold

  forces::FaultKind kind() const { return profile.kind; }
  bool unsafe() const { return fall_time.has_value(); }
  std::size_t size() const { return samples.size(); }
  Micros time_at(std::size_t i) const { return start_time + static_cast<std::int64_t>(i) * sample_period; }
};

/// Thrown when integration blows up mid-episode; carries what was recorded so far.
class EpisodeDiverged : public SimulationDiverged {
 public:
  EpisodeDiverged(const std::string& what, Trajectory prefix)
      : SimulationDiverged(what), prefix_(std::move(prefix)) {}
  const Trajectory& prefix() const { return prefix_; }

 private:
  Trajectory prefix_;
};

/// Latest time at which the profile applies a nonzero force.
double schedule_end(const forces::ForceProfile& profile);

/// Simulates the robot standing from upright rest under `profile`.
Trajectory run_episode(const forces::ForceProfile& profile, const RobotParams& params, const SimConfig& config);

/// Calibrated amplitude ranges: for abrupt and incipient faults the fall
/// boundary amplitude B is located by bisection and the range is [0, 2B].
/// The prelude range keeps the reference prelude-to-abrupt ratio.
forces::ForceRanges calibrate_force_ranges(const RobotParams& params, const SimConfig& config);

/// Boundary amplitude for a single fault shape (largest amplitude known to be safe).
double find_fall_boundary(forces::FaultKind shape, const RobotParams& params, const SimConfig& config);

/// The fixed-timing, prelude-free probe profile used by calibration.
forces::ForceProfile calibration_probe(forces::FaultKind shape, double amplitude);

}  // namespace fallpred::sim
