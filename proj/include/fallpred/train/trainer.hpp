#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fallpred/data/dataset.hpp"
#include "fallpred/eval/verdict.hpp"
#include "fallpred/nn/adam.hpp"
#include "fallpred/nn/network.hpp"
#include "fallpred/train/save_criteria.hpp"

namespace fallpred::train {

enum class TaskKind { fault, interval, lead };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

struct TrainConfig {
  std::size_t epochs = 4;
  std::size_t batch_size = 64;
  nn::AdamConfig adam;
  std::uint64_t seed = 1;
  std::size_t filters = 8;
  std::size_t kernel = 5;
  std::size_t stride = 1;
  std::size_t pool = 2;
  std::size_t hidden = 32;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  // fault classifier only
  std::optional<EpochMetrics> metrics;
  // interval classifier: macro accuracy; regressor: mean absolute error
  std::optional<double> val_score;
  bool saved = false;
  SaveRule rule = SaveRule::none;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::optional<std::size_t> saved_epoch;  // epoch whose parameters were kept
  std::string warning;

  void write_csv(std::ostream& out) const;
};

struct TrainedModel {
  TaskKind task = TaskKind::fault;
  nn::Network network;
  double threshold = 0.5;  // p*, fault classifier only
  TrainingLog log;
};

/// Target value for each window label, and the head that predicts it.
struct Objective {
  nn::LossKind loss = nn::LossKind::bce;
  std::size_t outputs = 1;
  nn::OutputActivation output = nn::OutputActivation::none;
  std::function<double(const data::WindowLabel&)> target;
};

Objective fault_objective();
Objective interval_objective();
Objective lead_objective();

nn::NetworkSpec network_spec(const data::Dataset& dataset, const TrainConfig& config, const Objective& objective);

/// Runs `config.epochs` passes of mini-batch Adam over `train`. After each
/// epoch `on_epoch` fills in the record's validation fields and returns
/// whether to keep the current parameters. Returns the kept parameters (the
/// last epoch's if none were kept).
nn::Network fit(const data::Dataset& train, const data::ScalerParams& scaler, const Objective& objective,
                const TrainConfig& config, const std::function<bool(const nn::Network&, EpochRecord&)>& on_epoch,
                TrainingLog& log);

/// Network outputs for every window of `dataset`, `outputs` values per window.
std::vector<double> predict_windows(const nn::Network& net, const data::Dataset& dataset,
                                    const data::ScalerParams& scaler);

/// Fault probabilities (sigmoid of the logit) for every window.
std::vector<double> fault_probabilities(const nn::Network& net, const data::Dataset& dataset,
                                        const data::ScalerParams& scaler);

/// One verdict per trajectory of `dataset` when windows with probability >=
/// threshold are flagged.
std::vector<eval::TrajectoryVerdict> verdicts_at(const data::Dataset& dataset, std::span<const double> probabilities,
                                                 double threshold);

/// Fault classifier over base-feature windows with binary labels; candidates
/// are kept according to `criteria`.
TrainedModel train_fault_classifier(const data::Dataset& train, const data::Dataset& val,
                                    const data::ScalerParams& scaler, const TrainConfig& config,
                                    SaveCriteria criteria);

/// Three-class lead-interval classifier over fault-positive extended windows;
/// keeps the epoch with the best validation macro accuracy. Throws DataError
/// if a class is missing from `train`.
TrainedModel train_lead_classifier(const data::Dataset& train, const data::Dataset& val,
                                   const data::ScalerParams& scaler, const TrainConfig& config);

/// Lead regressor over fault-positive extended windows with lead in [0,1);
/// keeps the epoch with the lowest validation mean absolute error. Throws
/// DataError if `train` has no such windows.
TrainedModel train_lead_regressor(const data::Dataset& train, const data::Dataset& val,
                                  const data::ScalerParams& scaler, const TrainConfig& config);

/// Per-class accuracy of an interval classifier (NaN for classes absent from
/// the set) and their mean over present classes.
struct IntervalAccuracy {
  std::vector<double> per_class;
  std::vector<std::size_t> support;
  double macro = 0.0;
};
IntervalAccuracy interval_accuracy(const nn::Network& net, const data::Dataset& dataset,
                                   const data::ScalerParams& scaler);

int argmax_class(std::span<const double> logits);

struct ThresholdPoint {
  double threshold = 0.0;
  double fpr = 0.0;            // trajectory level
  double lead = 0.0;           // mean over detected unsafe trajectories, s
  double coverage_lead = 0.0;  // mean over all unsafe trajectories, undetected as 0, s
  double window_fpr = 0.0;     // flagged negative windows / negative windows
  std::size_t positive_windows = 0;
};

std::vector<ThresholdPoint> threshold_sweep(const data::Dataset& dataset, std::span<const double> probabilities,
                                            std::span<const double> thresholds);

struct ThresholdCalibration {
  double threshold = 0.5;
  ThresholdPoint chosen;
  ThresholdPoint at_default;  // p = 0.5
  std::vector<ThresholdPoint> grid;
};

/// Smallest p on the grid 0.01, 0.02, ..., 0.99 whose trajectory-level FPR on
/// `val` is at most `target_fpr`. Throws ModelError with the best achievable
/// FPR when no grid value reaches the target.
ThresholdCalibration calibrate_threshold(const data::Dataset& val, std::span<const double> probabilities,
                                         double target_fpr);
ThresholdCalibration calibrate_threshold(const nn::Network& net, const data::Dataset& val,
                                         const data::ScalerParams& scaler, double target_fpr);

}  // namespace fallpred::train
