#include "fallpred/eval/verdict.hpp"

namespace fallpred::eval {

TrajectoryVerdict make_verdict(const DetectionOutcome& o) {
  TrajectoryVerdict v;
  v.id = o.id;
  v.kind = o.kind;
  v.unsafe = o.fall_time.has_value();
  v.detection = o.detection;
  if (v.unsafe && o.detection) {
    v.lead = *o.fall_time - *o.detection;
    v.predicted_lead = o.predicted_lead;
    if (o.fault_time && o.kind != forces::FaultKind::intermittent) v.response = *o.detection - *o.fault_time;
  }
  return v;
}

double false_positive_rate(std::span<const TrajectoryVerdict> verdicts) {
  std::size_t safe = 0, flagged = 0;
  for (const auto& v : verdicts) {
    if (v.unsafe) continue;
    ++safe;
    if (v.detection) ++flagged;
  }
  return safe == 0 ? 0.0 : static_cast<double>(flagged) / static_cast<double>(safe);
}

double false_negative_rate(std::span<const TrajectoryVerdict> verdicts) {
  std::size_t unsafe = 0, missed = 0;
  for (const auto& v : verdicts) {
    if (!v.unsafe) continue;
    ++unsafe;
    if (!v.detection) ++missed;
  }
  return unsafe == 0 ? 0.0 : static_cast<double>(missed) / static_cast<double>(unsafe);
}

double mean_lead(std::span<const TrajectoryVerdict> verdicts) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : verdicts) {
    if (!v.lead) continue;
    sum += to_seconds(*v.lead);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace fallpred::eval
