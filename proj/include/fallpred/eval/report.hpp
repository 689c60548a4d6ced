#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fallpred/data/windows.hpp"
#include "fallpred/eval/verdict.hpp"
#include "fallpred/pipeline/pipeline.hpp"

namespace fallpred::eval {

/// Detection metrics over one group of trajectories.
struct GroupMetrics {
  std::string name;  // fault kind, or "all"
  std::size_t trajectories = 0;
  std::size_t safe = 0;
  std::size_t unsafe = 0;
  std::size_t detected = 0;  // unsafe trajectories flagged at least once
  double fpr = 0.0;
  double fnr = 0.0;
  std::optional<double> mean_lead;
  std::optional<double> min_lead;
  std::optional<double> mean_response;        // absent when no trajectory has one
  std::optional<double> mean_predicted_lead;  // over detections with a lead estimate
  std::optional<double> lead_gap;             // |mean predicted lead - mean actual lead|

  bool operator==(const GroupMetrics&) const = default;
};

struct RegressorErrors {
  std::size_t count = 0;
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;

  bool operator==(const RegressorErrors&) const = default;
};

/// Model-level statistics over ground-truth windows, independent of gating.
struct WindowMetrics {
  std::vector<double> interval_accuracy;      // per class, NaN when absent
  std::vector<std::size_t> interval_support;  // windows per class
  std::optional<RegressorErrors> regressor;   // over windows with lead in [0,1)
};

struct EvalReport {
  std::vector<GroupMetrics> groups;  // one per fault kind present, then "all"
  WindowMetrics windows;

  const GroupMetrics& group(std::string_view name) const;

  /// Aligned table for reading.
  void write_text(std::ostream& out) const;
  /// Long-format CSV (scope,metric,value), readable by read_csv.
  void write_csv(std::ostream& out) const;
  static EvalReport read_csv(std::istream& in);
};

bool same_report(const EvalReport& a, const EvalReport& b);

GroupMetrics group_metrics(std::string name, std::span<const TrajectoryVerdict> verdicts);

/// Pure aggregation of per-trajectory verdicts and window statistics.
EvalReport aggregate(std::span<const TrajectoryVerdict> verdicts, WindowMetrics windows);

/// Streams every trajectory through the pipeline. Trajectories run in
/// parallel; results keep the input order.
std::vector<TrajectoryVerdict> stream_verdicts(const pipeline::PipelineBundle& bundle,
                                               std::span<const sim::Trajectory> trajectories);

/// Interval accuracy over fault-positive windows and regressor errors over
/// windows with lead in [0,1), each model applied directly.
WindowMetrics window_metrics(const pipeline::PipelineBundle& bundle, std::span<const sim::Trajectory> trajectories);

/// Throws DataError for an empty set.
EvalReport evaluate(const pipeline::PipelineBundle& bundle, std::span<const sim::Trajectory> trajectories);

/// Drops every sample after the first one whose CoM height is below `height`;
/// labels are kept.
sim::Trajectory trim_trajectory(const sim::Trajectory& traj, double height);

EvalReport trimmed_evaluate(const pipeline::PipelineBundle& bundle, std::span<const sim::Trajectory> trajectories,
                            double trim_height);

struct HistogramBin {
  Micros start{0};
  std::size_t count = 0;
};

/// Counts of finite-lead windows per bin [k w, (k+1) w), from bin 0 to the
/// last nonempty one. Throws ConfigError unless width > 0.
std::vector<HistogramBin> lead_histogram(std::span<const data::WindowLabel> windows, double bin_width);

/// Fault-positive window labels of each trajectory with unclipped leads.
std::vector<data::WindowLabel> unclipped_fault_labels(std::span<const sim::Trajectory> trajectories,
                                                      const data::WindowParams& params);

void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins);
void write_verdicts_csv(std::ostream& out, std::span<const TrajectoryVerdict> verdicts);

}  // namespace fallpred::eval
