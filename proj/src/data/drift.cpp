#include "fallpred/data/drift.hpp"

namespace fallpred::data {

sim::Trajectory drift_correct(const sim::Trajectory& traj) {
  if (traj.samples.empty()) throw DataError("drift correction needs a nonempty trajectory");
  sim::Trajectory out = traj;
  const sim::RobotState first = traj.samples.front();
  for (sim::RobotState& s : out.samples) {
    for (int j = 0; j < 2; ++j) {
      s.q[j] -= first.q[j];
      s.qd[j] -= first.qd[j];
      s.tau[j] -= first.tau[j];
    }
    s.com.x -= first.com.x;
    s.com.z -= first.com.z;
    s.com_vel.x -= first.com_vel.x;
    s.com_vel.z -= first.com_vel.z;
    s.midtoe.x -= first.midtoe.x;
    s.midtoe.z -= first.midtoe.z;
    s.contact -= first.contact;
  }
  return out;
}

FeatureSeries drift_correct(const FeatureSeries& series) {
  if (series.length == 0) throw DataError("drift correction needs a nonempty series");
  FeatureSeries out = series;
  for (std::size_t i = 0; i < series.length; ++i) {
    for (std::size_t k = 0; k < series.dim; ++k) out.values[i * series.dim + k] -= series.values[k];
  }
  return out;
}

}  // namespace fallpred::data
