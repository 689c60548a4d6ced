#include "fallpred/train/save_criteria.hpp"

#include <cmath>

#include "fallpred/error.hpp"

namespace fallpred::train {

std::string_view to_string(SaveRule rule) {
  switch (rule) {
    case SaveRule::none: return "none";
    case SaveRule::fpr_decreased: return "fpr_decreased";
    case SaveRule::lead_increased: return "lead_increased";
    case SaveRule::under_threshold: return "under_threshold";
  }
  return "?";
}

SaveCriteria::SaveCriteria(double max_fpr) : max_fpr_(max_fpr) {
  if (!(max_fpr >= 0.0 && max_fpr <= 1.0)) throw ConfigError("save criteria: max_fpr must lie in [0,1]");
}

SaveRule save_rule(const EpochMetrics& c, const std::optional<EpochMetrics>& ref, double max_fpr) {
  if (ref) {
    if (c.val_fpr < ref->val_fpr) return SaveRule::fpr_decreased;
    if (c.val_fpr == ref->val_fpr && c.val_lead > ref->val_lead && c.train_fpr < ref->train_fpr)
      return SaveRule::lead_increased;
  }
  if (c.val_fpr <= max_fpr && c.train_fpr <= max_fpr) return SaveRule::under_threshold;
  return SaveRule::none;
}

SaveRule SaveCriteria::consider(const EpochMetrics& candidate) {
  const SaveRule rule = save_rule(candidate, best_, max_fpr_);
  if (rule != SaveRule::none || !best_) best_ = candidate;
  return rule;
}

std::vector<SaveRule> replay_save_rules(std::span<const EpochMetrics> history, double max_fpr) {
  SaveCriteria criteria(max_fpr);
  std::vector<SaveRule> out;
  out.reserve(history.size());
  for (const auto& m : history) out.push_back(criteria.consider(m));
  return out;
}

}  // namespace fallpred::train
