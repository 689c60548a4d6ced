#include "fallpred/pipeline/pipeline.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fallpred/binary_io.hpp"
#include "fallpred/data/drift.hpp"
#include "fallpred/error.hpp"
#include "fallpred/nn/serialize.hpp"

namespace fallpred::pipeline {

namespace {

constexpr char kMagic[8] = {'F', 'P', 'B', 'U', 'N', 'D', 'L', 'E'};

void check_model(const train::TrainedModel& m, train::TaskKind task, const data::WindowParams& window,
                 data::FeatureVariant variant, std::size_t outputs, nn::OutputActivation head) {
  const std::string name(train::to_string(task));
  if (m.task != task) throw ModelError(name + " model slot holds a " + std::string(train::to_string(m.task)) + " model");
  const nn::NetworkSpec& s = m.network.spec();
  if (s.window_length != window.length) throw ModelError(name + " model window length does not match the bundle");
  if (s.channels != data::feature_dim(variant)) throw ModelError(name + " model expects a different feature count");
  if (s.outputs != outputs || s.output != head) throw ModelError(name + " model has the wrong output head");
}

void scale_into(const data::ScalerParams& scaler, std::span<const double> raw, std::vector<double>& out) {
  out.assign(raw.begin(), raw.end());
  data::apply_scaler(scaler, out);
}

void put_scaler(std::ostream& out, const data::ScalerParams& s) {
  binary::put_u64(out, s.dim());
  binary::put_f64s(out, s.min);
  binary::put_f64s(out, s.max);
}

data::ScalerParams get_scaler(std::istream& in) {
  const std::uint64_t d = binary::get_u64(in);
  if (d > 1024) throw ModelError("implausible scaler size in bundle");
  data::ScalerParams s;
  s.min = binary::get_f64s(in, d);
  s.max = binary::get_f64s(in, d);
  return s;
}

}  // namespace

void PipelineBundle::validate() const {
  try {
    window.validate();
    base_scaler.validate();
    extended_scaler.validate();
  } catch (const Error& e) {
    throw ModelError(std::string("bundle: ") + e.what());
  }
  if (base_scaler.dim() != data::feature_dim(data::FeatureVariant::base))
    throw ModelError("bundle: base scaler has the wrong feature count");
  if (extended_scaler.dim() != data::feature_dim(data::FeatureVariant::extended))
    throw ModelError("bundle: extended scaler has the wrong feature count");
  check_model(fault, train::TaskKind::fault, window, data::FeatureVariant::base, 1, nn::OutputActivation::none);
  check_model(interval, train::TaskKind::interval, window, data::FeatureVariant::extended, data::kIntervalCount,
              nn::OutputActivation::none);
  check_model(lead, train::TaskKind::lead, window, data::FeatureVariant::extended, 1, nn::OutputActivation::sigmoid);
  if (!(fault.threshold > 0.0 && fault.threshold < 1.0)) throw ModelError("bundle: threshold must lie in (0,1)");
}

Prediction predict_features(const PipelineBundle& b, std::span<const double> base, std::span<const double> extended,
                            CallStats* stats) {
  const std::size_t m = b.window.length;
  if (base.size() != m * b.base_scaler.dim()) throw ModelError("predict: base window has the wrong shape");
  if (extended.size() != m * b.extended_scaler.dim()) throw ModelError("predict: extended window has the wrong shape");

  thread_local nn::Workspace ws;
  thread_local std::vector<double> x;
  Prediction p;
  scale_into(b.base_scaler, base, x);
  if (stats) ++stats->fault;
  p.probability = nn::sigmoid(b.fault.network.forward(x, ws)[0]);
  p.fault = p.probability >= b.fault.threshold;
  if (!p.fault) return p;

  scale_into(b.extended_scaler, extended, x);
  if (stats) ++stats->interval;
  const int cls = train::argmax_class(b.interval.network.forward(x, ws));
  p.interval = cls;
  if (cls == 0) {
    if (stats) ++stats->lead;
    p.lead = b.lead.network.forward(x, ws)[0];
  } else {
    p.lead = kIntervalLead[cls];
  }
  return p;
}

Prediction predict(const PipelineBundle& b, std::span<const sim::RobotState> window, CallStats* stats) {
  const std::size_t m = b.window.length;
  if (window.size() != m) throw DataError("predict: window must hold exactly " + std::to_string(m) + " states");
  data::FeatureSeries base{data::FeatureVariant::base, data::feature_dim(data::FeatureVariant::base), m, {}};
  data::FeatureSeries ext{data::FeatureVariant::extended, data::feature_dim(data::FeatureVariant::extended), m, {}};
  for (const auto& s : window) {
    const auto fb = data::extract_features(s, base.variant);
    const auto fe = data::extract_features(s, ext.variant);
    base.values.insert(base.values.end(), fb.begin(), fb.end());
    ext.values.insert(ext.values.end(), fe.begin(), fe.end());
  }
  std::vector<double> xb(m * base.dim), xe(m * ext.dim);
  data::materialize(base, m - 1, m, xb);
  data::materialize(ext, m - 1, m, xe);
  return predict_features(b, xb, xe, stats);
}

StreamResult predict_stream(const PipelineBundle& b, const sim::Trajectory& trajectory, CallStats* stats) {
  const std::size_t m = b.window.length;
  if (trajectory.size() < m) throw DataError("predict: trajectory is shorter than one window");
  const sim::Trajectory corrected = b.drift_correction ? data::drift_correct(trajectory) : sim::Trajectory{};
  const sim::Trajectory& traj = b.drift_correction ? corrected : trajectory;
  const auto base = data::extract_series(traj, data::FeatureVariant::base);
  const auto ext = data::extract_series(traj, data::FeatureVariant::extended);
  std::vector<double> xb(m * base.dim), xe(m * ext.dim);

  StreamResult r;
  r.steps.reserve(traj.size() - m + 1);
  for (std::size_t end = m - 1; end < traj.size(); ++end) {
    data::materialize(base, end, m, xb);
    data::materialize(ext, end, m, xe);
    StreamStep step{end, traj.time_at(end), predict_features(b, xb, xe, stats)};
    if (step.prediction.fault && !r.first_detection) {
      r.first_detection = step.time;
      r.lead_at_detection = step.prediction.lead;
    }
    r.steps.push_back(step);
  }
  return r;
}

void write_bundle(const std::filesystem::path& file, const PipelineBundle& b) {
  b.validate();
  nlohmann::json manifest = {
      {"format", "fallpred-bundle"},
      {"window_length", b.window.length},
      {"stride", b.window.stride},
      {"horizon", b.window.horizon},
      {"threshold", b.fault.threshold},
      {"drift_correction", b.drift_correction},
      {"models", {"fault", "interval", "lead"}},
      {"architectures", {b.fault.network.spec().describe(), b.interval.network.spec().describe(),
                         b.lead.network.spec().describe()}},
  };
  const std::string text = manifest.dump();

  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write bundle " + file.string());
  out.write(kMagic, sizeof kMagic);
  binary::put_u32(out, kBundleFormatVersion);
  binary::put_string(out, text);
  binary::put_u64(out, binary::fnv1a(text));
  put_scaler(out, b.base_scaler);
  put_scaler(out, b.extended_scaler);
  nn::write_network(out, b.fault.network);
  nn::write_network(out, b.interval.network);
  nn::write_network(out, b.lead.network);
  if (!out) throw DataError("failed writing bundle " + file.string());
}

PipelineBundle read_bundle(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open bundle " + file.string());
  try {
    char magic[8];
    binary::read_exact(in, magic, sizeof magic);
    if (!std::equal(magic, magic + 8, kMagic)) throw ModelError(file.string() + " is not a pipeline bundle");
    const std::uint32_t version = binary::get_u32(in);
    if (version != kBundleFormatVersion) {
      throw ModelError("bundle format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kBundleFormatVersion) + ")");
    }
    const std::string text = binary::get_string(in, 1u << 20);
    if (binary::get_u64(in) != binary::fnv1a(text)) throw ModelError("bundle manifest hash mismatch");
    const auto manifest = nlohmann::json::parse(text);
    if (manifest.at("format") != "fallpred-bundle") throw ModelError("unexpected bundle format tag");

    data::WindowParams window;
    window.length = manifest.at("window_length").get<std::size_t>();
    window.stride = manifest.at("stride").get<std::size_t>();
    window.horizon = manifest.at("horizon").get<double>();
    data::ScalerParams base_scaler = get_scaler(in);
    data::ScalerParams ext_scaler = get_scaler(in);
    nn::Network fault = nn::read_network(in);
    nn::Network interval = nn::read_network(in);
    nn::Network lead = nn::read_network(in);
    PipelineBundle b{{train::TaskKind::fault, std::move(fault), manifest.at("threshold").get<double>(), {}},
                     {train::TaskKind::interval, std::move(interval), 0.5, {}},
                     {train::TaskKind::lead, std::move(lead), 0.5, {}},
                     std::move(base_scaler),
                     std::move(ext_scaler),
                     window,
                     manifest.at("drift_correction").get<bool>()};
    b.validate();
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("malformed bundle manifest: " + std::string(e.what()));
  } catch (const DataError& e) {
    throw ModelError("truncated or corrupt bundle: " + std::string(e.what()));
  }
}

}  // namespace fallpred::pipeline
