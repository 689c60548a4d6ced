#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fallpred/cli/config.hpp"
#include "fallpred/eval/report.hpp"
#include "fallpred/pipeline/pipeline.hpp"

namespace fallpred::cli {

/// Exit status of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFaultFlagged = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitModel = 4,
  kExitInternal = 5,
};

/// Simulates every configured trajectory under `ranges`. Trajectory i gets
/// seed derive_seed(config.seed, i); episodes run in parallel, results are in
/// id order (abrupt, then incipient, then intermittent).
std::vector<sim::Trajectory> generate_trajectories(const RunConfig& config, const forces::ForceRanges& ranges);

/// Calibrates force ranges, simulates the set and writes it to `out`.
void cmd_generate(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

struct TrainArtifacts {
  pipeline::PipelineBundle bundle;
  train::ThresholdCalibration threshold;
  std::vector<std::uint64_t> train_ids;
  std::vector<std::uint64_t> val_ids;
  std::vector<std::uint64_t> test_ids;  // held-out single faults plus every intermittent trajectory
};

/// Splits abrupt and incipient trajectories into train/val/test, trains the
/// three models (concurrently) and calibrates the threshold.
TrainArtifacts train_pipeline(const RunConfig& config, std::span<const sim::Trajectory> trajectories);

/// Writes bundle.fpb, split.json, the training logs and the threshold sweep.
void cmd_train(const RunConfig& config, const std::filesystem::path& data_dir, const std::filesystem::path& out,
               std::ostream& log);

/// Trajectories to evaluate: the test split recorded next to the bundle when
/// present, otherwise all of them; then filtered by fault kind.
std::vector<sim::Trajectory> select_for_eval(std::vector<sim::Trajectory> all, const std::filesystem::path& bundle,
                                             std::optional<forces::FaultKind> kind);

/// Writes report.txt, report.csv, verdicts.csv and histogram.csv.
eval::EvalReport cmd_eval(const RunConfig& config, const std::filesystem::path& bundle,
                          const std::filesystem::path& data_dir, const std::filesystem::path& out,
                          std::optional<forces::FaultKind> kind, std::optional<double> trim_height, std::ostream& log);

/// Writes predictions.csv; returns kExitFaultFlagged if any window was flagged.
int cmd_predict(const RunConfig& config, const std::filesystem::path& bundle, const std::filesystem::path& trajectory,
                const std::filesystem::path& out, std::ostream& log);

}  // namespace fallpred::cli
