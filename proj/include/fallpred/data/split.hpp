#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fallpred/sim/episode.hpp"

namespace fallpred::data {

struct SplitSpec {
  std::size_t test_reserve = 200;
  double train_fraction = 0.8;  // of what remains after the test reserve
  std::uint64_t seed = 0;

  void validate() const;
};

/// Indices into the input sequence, each list ascending.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Stratifies on the safe/unsafe label. Whole trajectories are assigned, so no
/// window of one trajectory can land in two splits. Per-split totals are
/// exact; per-stratum counts are within one trajectory of proportional.
Split stratified_split(std::span<const bool> unsafe, const SplitSpec& spec);
Split stratified_split(std::span<const sim::Trajectory> trajectories, const SplitSpec& spec);

}  // namespace fallpred::data
