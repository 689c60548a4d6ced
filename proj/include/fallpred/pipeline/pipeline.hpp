#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "fallpred/data/dataset.hpp"
#include "fallpred/train/trainer.hpp"

namespace fallpred::pipeline {

/// Fault classifier on base features gating an interval classifier, which
/// gates a lead regressor; both lead models use extended features.
struct PipelineBundle {
  train::TrainedModel fault;
  train::TrainedModel interval;
  train::TrainedModel lead;
  data::ScalerParams base_scaler;
  data::ScalerParams extended_scaler;
  data::WindowParams window;
  bool drift_correction = false;  // applied to whole trajectories before streaming

  double threshold() const { return fault.threshold; }
  /// Throws ModelError if shapes, scalers and tasks do not line up.
  void validate() const;
};

struct Prediction {
  bool fault = false;
  std::optional<int> interval;
  std::optional<double> lead;  // seconds
  double probability = 0.0;    // fault probability
};

/// Counts of model invocations, for checking that the gates hold.
struct CallStats {
  std::atomic<std::uint64_t> fault{0};
  std::atomic<std::uint64_t> interval{0};
  std::atomic<std::uint64_t> lead{0};
};

/// Lead reported for each interval class: the regressor value for class 0,
/// the interval's lower end otherwise.
inline constexpr double kIntervalLead[] = {0.0, 1.0, 2.0};

/// Prediction for a window of exactly m robot states, oldest first.
/// Reentrant over a shared bundle.
Prediction predict(const PipelineBundle& bundle, std::span<const sim::RobotState> window,
                   CallStats* stats = nullptr);

/// Prediction for a window whose base and extended features (m x d, unscaled,
/// contact already averaged) have been built by the caller.
Prediction predict_features(const PipelineBundle& bundle, std::span<const double> base,
                            std::span<const double> extended, CallStats* stats = nullptr);

struct StreamStep {
  std::size_t end_index = 0;
  Micros time{0};
  Prediction prediction;
};

struct StreamResult {
  std::vector<StreamStep> steps;
  std::optional<Micros> first_detection;
  std::optional<double> lead_at_detection;  // predicted lead of the first flagged window
};

/// Slides the window one sample at a time over the trajectory. Throws
/// DataError if it has fewer than m samples.
StreamResult predict_stream(const PipelineBundle& bundle, const sim::Trajectory& trajectory,
                            CallStats* stats = nullptr);

/// Bundle file: magic, format version, JSON manifest (window parameters,
/// thresholds, scalers) with its hash, then the three networks.
inline constexpr std::uint32_t kBundleFormatVersion = 1;

void write_bundle(const std::filesystem::path& file, const PipelineBundle& bundle);
/// Throws ModelError on a version or hash mismatch or a malformed file.
PipelineBundle read_bundle(const std::filesystem::path& file);

}  // namespace fallpred::pipeline
