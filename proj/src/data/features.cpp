#include "fallpred/data/features.hpp"

#include <cmath>

namespace fallpred::data {

std::string_view to_string(FeatureVariant variant) {
  return variant == FeatureVariant::base ? "base" : "extended";
}

FeatureVariant parse_feature_variant(std::string_view name) {
  if (name == "base") return FeatureVariant::base;
  if (name == "extended") return FeatureVariant::extended;
  throw DataError("unknown feature variant '" + std::string(name) + "'");
}

std::vector<std::string> feature_names(FeatureVariant variant) {
  std::vector<std::string> names = {"com_rel_x", "com_rel_z", "com_vx",   "com_vz",
                                    "q_ankle",   "q_hip",     "qd_ankle", "qd_hip"};
  if (variant == FeatureVariant::extended) {
    names.insert(names.end(), {"tau_ankle", "tau_hip", "contact_mean"});
  }
  return names;
}

namespace {

void append_features(const sim::RobotState& s, FeatureVariant variant, double* out) {
  out[0] = s.com.x - s.midtoe.x;
  out[1] = s.com.z - s.midtoe.z;
  out[2] = s.com_vel.x;
  out[3] = s.com_vel.z;
  out[4] = s.q[0];
  out[5] = s.q[1];
  out[6] = s.qd[0];
  out[7] = s.qd[1];
  if (variant == FeatureVariant::extended) {
    out[8] = s.tau[0];
    out[9] = s.tau[1];
    out[10] = s.contact;
  }
  for (std::size_t i = 0; i < feature_dim(variant); ++i) {
    if (!std::isfinite(out[i])) {
      throw DataError("non-finite state value at t = " + std::to_string(s.t));
    }
  }
}

}  // namespace

FeatureVector extract_features(const sim::RobotState& state, FeatureVariant variant) {
  FeatureVector v(feature_dim(variant));
  append_features(state, variant, v.data());
  return v;
}

FeatureSeries extract_series(const sim::Trajectory& traj, FeatureVariant variant) {
  FeatureSeries series;
  series.variant = variant;
  series.dim = feature_dim(variant);
  series.length = traj.size();
  series.values.resize(series.length * series.dim);
  for (std::size_t i = 0; i < series.length; ++i) {
    append_features(traj.samples[i], variant, series.values.data() + i * series.dim);
  }
  return series;
}

}  // namespace fallpred::data
