#include "fallpred/data/split.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>

#include "fallpred/error.hpp"
#include "fallpred/rng.hpp"

namespace fallpred::data {

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
}

namespace {

/// Largest-remainder apportionment of `total` proportionally to `weights`.
std::array<std::size_t, 2> apportion(std::size_t total, const std::array<std::size_t, 2>& weights) {
  const std::size_t sum = weights[0] + weights[1];
  std::array<std::size_t, 2> out{0, 0};
  if (sum == 0) return out;
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (int s = 0; s < 2; ++s) {
    const double exact = static_cast<double>(total) * static_cast<double>(weights[s]) / static_cast<double>(sum);
    out[s] = static_cast<std::size_t>(std::floor(exact));
    remainder[s] = exact - static_cast<double>(out[s]);
    assigned += out[s];
  }
  while (assigned < total) {
    const int s = remainder[1] > remainder[0] ? 1 : 0;
    ++out[s];
    remainder[s] = -1.0;
    ++assigned;
  }
  return out;
}

}  // namespace

Split stratified_split(std::span<const bool> unsafe, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = unsafe.size();
  if (spec.test_reserve >= n) throw DataError("test reserve leaves no trajectories for training");

  std::array<std::vector<std::size_t>, 2> strata;
  for (std::size_t i = 0; i < n; ++i) strata[unsafe[i] ? 1 : 0].push_back(i);
  const std::array<std::size_t, 2> sizes{strata[0].size(), strata[1].size()};

  const std::size_t remaining = n - spec.test_reserve;
  const auto train_total = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(remaining)));
  const std::size_t splits_needed = (spec.test_reserve > 0 ? 1 : 0) + (train_total > 0 ? 1 : 0) +
                                    (remaining > train_total ? 1 : 0);
  static constexpr const char* kNames[2] = {"safe", "unsafe"};
  for (int s = 0; s < 2; ++s) {
    if (sizes[s] < splits_needed) {
      throw DataError(std::string("stratum '") + kNames[s] + "' has " + std::to_string(sizes[s]) +
                      " trajectories, fewer than the " + std::to_string(splits_needed) + " splits requested");
    }
  }

  const auto test_counts = apportion(spec.test_reserve, sizes);
  const std::array<std::size_t, 2> rest{sizes[0] - test_counts[0], sizes[1] - test_counts[1]};
  const auto train_counts = apportion(train_total, rest);

  Rng rng(spec.seed);
  Split split;
  for (int s = 0; s < 2; ++s) {
    std::vector<std::size_t>& members = strata[s];
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    auto it = members.begin();
    split.test.insert(split.test.end(), it, it + static_cast<std::ptrdiff_t>(test_counts[s]));
    it += static_cast<std::ptrdiff_t>(test_counts[s]);
    split.train.insert(split.train.end(), it, it + static_cast<std::ptrdiff_t>(train_counts[s]));
    it += static_cast<std::ptrdiff_t>(train_counts[s]);
    split.val.insert(split.val.end(), it, members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Split stratified_split(std::span<const sim::Trajectory> trajectories, const SplitSpec& spec) {
  // std::vector<bool> is not contiguous, so the labels go through a plain array
  auto labels = std::make_unique<bool[]>(trajectories.size());
  for (std::size_t i = 0; i < trajectories.size(); ++i) labels[i] = trajectories[i].unsafe();
  return stratified_split(std::span<const bool>(labels.get(), trajectories.size()), spec);
}

}  // namespace fallpred::data
