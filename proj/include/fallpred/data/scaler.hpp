#pragma once

#include <span>
#include <vector>

#include "fallpred/data/windows.hpp"

namespace fallpred::data {

/// Per-feature min-max normalization fitted on training data.
struct ScalerParams {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t dim() const { return min.size(); }
  bool is_constant(std::size_t feature) const { return !(max[feature] > min[feature]); }
  /// Features whose training range is empty; they are mapped to 0.
  std::vector<std::size_t> constant_features() const;
  void validate() const;
};

class ScalerAccumulator {
 public:
  explicit ScalerAccumulator(std::size_t dim);
  void add_row(std::span<const double> row);
  /// Adds every row of a row-major block.
  void add_rows(std::span<const double> rows);
  bool empty() const { return rows_ == 0; }
  ScalerParams finish() const;

 private:
  ScalerParams params_;
  std::size_t rows_ = 0;
};

/// Throws DataError for an empty training set.
ScalerParams fit_scaler(std::span<const Window> train);

/// Maps each row in place; values outside the training range are not clipped.
void apply_scaler(const ScalerParams& params, std::span<double> rows);
Window apply_scaler(const ScalerParams& params, Window window);
void invert_scaler(const ScalerParams& params, std::span<double> rows);

}  // namespace fallpred::data
