#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fallpred/data/features.hpp"
#include "fallpred/time.hpp"

namespace fallpred::data {

struct WindowParams {
  std::size_t length = 30;  // m, samples per window
  std::size_t stride = 1;
  double horizon = 4.0;     // H, seconds

  Micros horizon_us() const { return to_micros(horizon); }
  void validate() const;
};

/// Lead-time interval classes [0,1), [1,2), [2,H].
inline constexpr int kNoInterval = -1;
inline constexpr int kIntervalCount = 3;

int interval_of(Micros lead);

struct WindowLabel {
  Micros end_time{0};
  bool fault = false;
  std::optional<Micros> lead;  // absent means infinite
  int interval = kNoInterval;

  double lead_seconds() const {
    return lead ? to_seconds(*lead) : std::numeric_limits<double>::infinity();
  }
};

/// Fault label of the window ending at sample `end_index`: positive iff the
/// trajectory is unsafe and the window ends at or after the (first) fault
/// onset; positive windows get lead = t_fall - t_end clipped to [0, H].
WindowLabel label_window(const sim::Trajectory& traj, std::size_t end_index, Micros horizon);

/// Materialized window: rows are consecutive samples, oldest first.
struct Window {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  WindowLabel label;
  std::uint64_t trajectory_id = 0;
  std::size_t end_index = 0;

  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

struct WindowSet {
  std::vector<Window> windows;
  bool too_short = false;  // trajectory had fewer than m samples
};

WindowSet make_windows(const sim::Trajectory& traj, const WindowParams& params,
                       FeatureVariant variant = FeatureVariant::base);

/// Window that refers into a feature series instead of owning its values.
struct WindowRef {
  std::uint32_t series = 0;
  std::uint32_t end = 0;
  WindowLabel label;
};

/// Labels and positions of every window of `traj`; `series_index` is stored
/// in each reference.
std::vector<WindowRef> index_windows(const sim::Trajectory& traj, std::uint32_t series_index,
                                     const WindowParams& params);

/// Copies the m rows ending at `end` into `out` (m x dim). For the extended
/// variant the contact column is replaced by its mean over the window.
void materialize(const FeatureSeries& series, std::size_t end, std::size_t m, std::span<double> out);

}  // namespace fallpred::data
