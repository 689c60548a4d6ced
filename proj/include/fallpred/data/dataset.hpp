#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "fallpred/data/scaler.hpp"
#include "fallpred/data/windows.hpp"

namespace fallpred::data {

/// Labels of the trajectory behind a feature series.
struct SeriesInfo {
  std::uint64_t id = 0;
  forces::FaultKind kind = forces::FaultKind::prelude_only;
  std::optional<Micros> fault_time;
  std::optional<Micros> fall_time;

  bool unsafe() const { return fall_time.has_value(); }
};

/// Windows over a group of trajectories, held as references into per-trajectory
/// feature series.
struct Dataset {
  FeatureVariant variant = FeatureVariant::base;
  WindowParams params;
  std::vector<FeatureSeries> series;           // one per trajectory
  std::vector<SeriesInfo> info;                // parallel to series
  std::vector<WindowRef> windows;

  std::size_t window_size() const { return params.length * feature_dim(variant); }
  /// Raw (unscaled) values of window i.
  void materialize(std::size_t i, std::span<double> out) const;
  /// Scaled values of window i.
  void materialize(std::size_t i, const ScalerParams& scaler, std::span<double> out) const;
};

using WindowFilter = std::function<bool(const WindowLabel&)>;

/// Builds the dataset for the given trajectories; windows failing `keep` are
/// dropped (their trajectory's series is still stored).
Dataset build_dataset(std::span<const sim::Trajectory* const> trajectories, const WindowParams& params,
                      FeatureVariant variant, const WindowFilter& keep = {});

ScalerParams fit_scaler(const Dataset& train);

/// Writes windows.bin (little-endian float64 tensor, n x m x d, scaled),
/// labels.csv and manifest.json into `dir`.
void write_dataset_bundle(const std::filesystem::path& dir, const Dataset& dataset, const ScalerParams& scaler,
                          const nlohmann::json& manifest_extra = nlohmann::json::object());

struct WindowTensor {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

WindowTensor read_window_tensor(const std::filesystem::path& file);

nlohmann::json scaler_to_json(const ScalerParams& scaler);
ScalerParams scaler_from_json(const nlohmann::json& j);

}  // namespace fallpred::data
