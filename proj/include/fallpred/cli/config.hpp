#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "fallpred/data/split.hpp"
#include "fallpred/data/windows.hpp"
#include "fallpred/forces/force_profile.hpp"
#include "fallpred/sim/episode.hpp"
#include "fallpred/train/trainer.hpp"

namespace fallpred::cli {

/// Everything a run needs, read from an INI file with sections
/// run, robot, sim, faults, split, windows, network, training.
/// Keys left out keep their defaults.
struct RunConfig {
  std::uint64_t seed = 1;
  std::filesystem::path output = "run";

  sim::RobotParams robot;
  sim::SimConfig sim;
  forces::TimingSpec timing;
  std::size_t abrupt_count = 900;
  std::size_t incipient_count = 900;
  std::size_t intermittent_count = 100;

  data::SplitSpec split;
  data::WindowParams window;
  bool drift_correction = false;
  double histogram_bin = 0.1;

  train::TrainConfig network;  // architecture, batch size, optimizer
  std::size_t fault_epochs = 4;
  std::size_t interval_epochs = 4;
  std::size_t lead_epochs = 4;
  double max_fpr = 0.0;     // saving rule 3
  double target_fpr = 0.0;  // threshold calibration

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Throws ConfigError for unknown sections or keys, malformed values, or an
/// unparsable file.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& file);

/// Complete INI text of `config`; parse_config reads it back unchanged.
std::string to_ini(const RunConfig& config);

/// Writes config.ini into `dir`.
void write_config_snapshot(const std::filesystem::path& dir, const RunConfig& config);

}  // namespace fallpred::cli
