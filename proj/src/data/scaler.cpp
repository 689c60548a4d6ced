#include "fallpred/data/scaler.hpp"

#include <algorithm>
#include <limits>

#include "fallpred/error.hpp"

namespace fallpred::data {

std::vector<std::size_t> ScalerParams::constant_features() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (is_constant(i)) out.push_back(i);
  }
  return out;
}

void ScalerParams::validate() const {
  if (min.size() != max.size()) throw DataError("scaler min/max sizes differ");
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(max[i] >= min[i])) throw DataError("scaler max below min for feature " + std::to_string(i));
  }
}

ScalerAccumulator::ScalerAccumulator(std::size_t dim) {
  params_.min.assign(dim, std::numeric_limits<double>::infinity());
  params_.max.assign(dim, -std::numeric_limits<double>::infinity());
}

void ScalerAccumulator::add_row(std::span<const double> row) {
  if (row.size() != params_.dim()) throw DataError("scaler row has the wrong width");
  for (std::size_t i = 0; i < row.size(); ++i) {
    params_.min[i] = std::min(params_.min[i], row[i]);
    params_.max[i] = std::max(params_.max[i], row[i]);
  }
  ++rows_;
}

void ScalerAccumulator::add_rows(std::span<const double> rows) {
  const std::size_t d = params_.dim();
  if (d == 0 || rows.size() % d != 0) throw DataError("scaler block is not a whole number of rows");
  for (std::size_t off = 0; off < rows.size(); off += d) add_row(rows.subspan(off, d));
}

ScalerParams ScalerAccumulator::finish() const {
  if (rows_ == 0) throw DataError("cannot fit a scaler on an empty training set");
  return params_;
}

ScalerParams fit_scaler(std::span<const Window> train) {
  if (train.empty()) throw DataError("cannot fit a scaler on an empty training set");
  ScalerAccumulator acc(train.front().cols);
  for (const Window& w : train) acc.add_rows(w.values);
  return acc.finish();
}

void apply_scaler(const ScalerParams& params, std::span<double> rows) {
  const std::size_t d = params.dim();
  if (d == 0 || rows.size() % d != 0) throw DataError("scaler applied to rows of the wrong width");
  for (std::size_t off = 0; off < rows.size(); off += d) {
    for (std::size_t i = 0; i < d; ++i) {
      double& v = rows[off + i];
      v = params.is_constant(i) ? 0.0 : (v - params.min[i]) / (params.max[i] - params.min[i]);
    }
  }
}

Window apply_scaler(const ScalerParams& params, Window window) {
  if (window.cols != params.dim()) throw DataError("scaler dimension does not match window");
  apply_scaler(params, window.values);
  return window;
}

void invert_scaler(const ScalerParams& params, std::span<double> rows) {
  const std::size_t d = params.dim();
  if (d == 0 || rows.size() % d != 0) throw DataError("scaler applied to rows of the wrong width");
  for (std::size_t off = 0; off < rows.size(); off += d) {
    for (std::size_t i = 0; i < d; ++i) {
      double& v = rows[off + i];
      v = params.is_constant(i) ? params.min[i] : params.min[i] + v * (params.max[i] - params.min[i]);
    }
  }
}

}  // namespace fallpred::data
