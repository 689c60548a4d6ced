#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace fallpred::train {

/// Trajectory-level metrics of one fault-classifier epoch.
struct EpochMetrics {
  double val_fpr = 0.0;
  double val_lead = 0.0;  // mean over detected unsafe validation trajectories, s
  double train_fpr = 0.0;
};

enum class SaveRule {
  none,
  fpr_decreased,    // validation FPR below the reference
  lead_increased,   // validation FPR equal, lead up, training FPR down
  under_threshold,  // both FPRs at or below the configured maximum
};

std::string_view to_string(SaveRule rule);

/// Model-saving decision for the fault classifier. The reference metrics are
/// those of the last saved epoch; before anything is saved they are the first
/// epoch's, so rules 1 and 2 cannot fire on epoch 1.
class SaveCriteria {
 public:
  explicit SaveCriteria(double max_fpr = 0.0);

  /// Returns the first rule the candidate satisfies and, if any, adopts its
  /// metrics as the new reference.
  SaveRule consider(const EpochMetrics& candidate);

  double max_fpr() const { return max_fpr_; }
  const std::optional<EpochMetrics>& reference() const { return best_; }

 private:
  double max_fpr_;
  std::optional<EpochMetrics> best_;
};

/// Decision of the first rule that applies, with no side effects.
SaveRule save_rule(const EpochMetrics& candidate, const std::optional<EpochMetrics>& reference, double max_fpr);

/// Decisions for a whole epoch history.
std::vector<SaveRule> replay_save_rules(std::span<const EpochMetrics> history, double max_fpr);

}  // namespace fallpred::train
