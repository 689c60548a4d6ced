#include "fallpred/data/windows.hpp"

#include <algorithm>

#include "fallpred/error.hpp"

namespace fallpred::data {

void WindowParams::validate() const {
  if (length == 0) throw ConfigError("window length must be positive");
  if (stride == 0) throw ConfigError("window stride must be positive");
  if (!(horizon > 2.0)) throw ConfigError("maximum prediction horizon must exceed 2 s");
}

int interval_of(Micros lead) {
  if (lead < Micros{1'000'000}) return 0;
  if (lead < Micros{2'000'000}) return 1;
  return 2;
}

WindowLabel label_window(const sim::Trajectory& traj, std::size_t end_index, Micros horizon) {
  WindowLabel label;
  label.end_time = traj.time_at(end_index);
  if (traj.unsafe() && traj.fault_time && label.end_time >= *traj.fault_time) {
    label.fault = true;
    label.lead = std::clamp(*traj.fall_time - label.end_time, Micros{0}, horizon);
    label.interval = interval_of(*label.lead);
  }
  return label;
}

namespace {

template <typename Emit>
bool for_each_window(const sim::Trajectory& traj, const WindowParams& params, Emit&& emit) {
  params.validate();
  if (traj.size() < params.length) return false;
  const Micros horizon = params.horizon_us();
  for (std::size_t end = params.length - 1; end < traj.size(); end += params.stride) {
    WindowLabel label = label_window(traj, end, horizon);
    if (traj.fall_time && label.end_time > *traj.fall_time) break;
    emit(end, label);
  }
  return true;
}

}  // namespace

WindowSet make_windows(const sim::Trajectory& traj, const WindowParams& params, FeatureVariant variant) {
  WindowSet set;
  const FeatureSeries series = extract_series(traj, variant);
  set.too_short = !for_each_window(traj, params, [&](std::size_t end, const WindowLabel& label) {
    Window w;
    w.rows = params.length;
    w.cols = series.dim;
    w.values.resize(w.rows * w.cols);
    materialize(series, end, params.length, w.values);
    w.label = label;
    w.trajectory_id = traj.id;
    w.end_index = end;
    set.windows.push_back(std::move(w));
  });
  return set;
}

std::vector<WindowRef> index_windows(const sim::Trajectory& traj, std::uint32_t series_index,
                                     const WindowParams& params) {
  std::vector<WindowRef> refs;
  for_each_window(traj, params, [&](std::size_t end, const WindowLabel& label) {
    refs.push_back({series_index, static_cast<std::uint32_t>(end), label});
  });
  return refs;
}

void materialize(const FeatureSeries& series, std::size_t end, std::size_t m, std::span<double> out) {
  if (end + 1 < m || end >= series.length) throw DataError("window does not fit inside the series");
  if (out.size() != m * series.dim) throw DataError("window buffer has the wrong size");
  const double* first = series.values.data() + (end + 1 - m) * series.dim;
  std::copy(first, first + m * series.dim, out.begin());
  if (series.variant == FeatureVariant::extended) {
    double mean = 0.0;
    for (std::size_t r = 0; r < m; ++r) mean += out[r * series.dim + kContactColumn];
    mean /= static_cast<double>(m);
    for (std::size_t r = 0; r < m; ++r) out[r * series.dim + kContactColumn] = mean;
  }
}

}  // namespace fallpred::data
