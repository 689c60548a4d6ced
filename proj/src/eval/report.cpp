#include "fallpred/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "fallpred/data/drift.hpp"
#include "fallpred/error.hpp"
#include "fallpred/format.hpp"
#include "fallpred/parallel.hpp"

namespace fallpred::eval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::optional<double> opt_parse(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

const GroupMetrics& EvalReport::group(std::string_view name) const {
  for (const auto& g : groups)
    if (g.name == name) return g;
  throw DataError("report has no group '" + std::string(name) + "'");
}

GroupMetrics group_metrics(std::string name, std::span<const TrajectoryVerdict> verdicts) {
  GroupMetrics g;
  g.name = std::move(name);
  g.trajectories = verdicts.size();
  std::vector<double> leads, responses, predicted;
  for (const auto& v : verdicts) {
    if (v.unsafe) {
      ++g.unsafe;
      if (v.detection) ++g.detected;
    } else {
      ++g.safe;
    }
    if (v.lead) leads.push_back(to_seconds(*v.lead));
    if (v.response) responses.push_back(to_seconds(*v.response));
    if (v.lead && v.predicted_lead) predicted.push_back(*v.predicted_lead);
  }
  g.fpr = false_positive_rate(verdicts);
  g.fnr = false_negative_rate(verdicts);
  g.mean_lead = mean_of(leads);
  if (!leads.empty()) g.min_lead = *std::min_element(leads.begin(), leads.end());
  g.mean_response = mean_of(responses);
  g.mean_predicted_lead = mean_of(predicted);
  if (g.mean_predicted_lead && g.mean_lead) g.lead_gap = std::abs(*g.mean_predicted_lead - *g.mean_lead);
  return g;
}

EvalReport aggregate(std::span<const TrajectoryVerdict> verdicts, WindowMetrics windows) {
  if (verdicts.empty()) throw DataError("evaluation needs at least one trajectory");
  EvalReport r;
  using forces::FaultKind;
  for (FaultKind kind : {FaultKind::prelude_only, FaultKind::abrupt, FaultKind::incipient, FaultKind::intermittent}) {
    std::vector<TrajectoryVerdict> part;
    for (const auto& v : verdicts)
      if (v.kind == kind) part.push_back(v);
    if (!part.empty()) r.groups.push_back(group_metrics(std::string(forces::to_string(kind)), part));
  }
  r.groups.push_back(group_metrics("all", verdicts));
  r.windows = std::move(windows);
  return r;
}

std::vector<TrajectoryVerdict> stream_verdicts(const pipeline::PipelineBundle& bundle,
                                               std::span<const sim::Trajectory> trajectories) {
  std::vector<TrajectoryVerdict> out(trajectories.size());
  parallel_for(trajectories.size(), [&](std::size_t i) {
    const sim::Trajectory& t = trajectories[i];
    const auto r = pipeline::predict_stream(bundle, t);
    out[i] = make_verdict({t.id, t.kind(), t.fault_time, t.fall_time, r.first_detection, r.lead_at_detection});
  });
  return out;
}

WindowMetrics window_metrics(const pipeline::PipelineBundle& bundle, std::span<const sim::Trajectory> trajectories) {
  const std::size_t m = bundle.window.length;
  const std::size_t k = data::kIntervalCount;
  std::vector<std::size_t> correct(k, 0);
  WindowMetrics wm;
  wm.interval_support.assign(k, 0);
  std::vector<double> errors;
  nn::Workspace ws;
  std::vector<double> x;
  for (const auto& raw : trajectories) {
    if (raw.size() < m) continue;
    const sim::Trajectory traj = bundle.drift_correction ? data::drift_correct(raw) : raw;
    const auto series = data::extract_series(traj, data::FeatureVariant::extended);
    x.resize(m * series.dim);
    for (const auto& w : data::index_windows(traj, 0, bundle.window)) {
      if (!w.label.fault) continue;
      data::materialize(series, w.end, m, x);
      data::apply_scaler(bundle.extended_scaler, x);
      const int truth = w.label.interval;
      ++wm.interval_support[truth];
      if (train::argmax_class(bundle.interval.network.forward(x, ws)) == truth) ++correct[truth];
      const double lead = w.label.lead_seconds();
      if (lead < 1.0) errors.push_back(std::abs(bundle.lead.network.forward(x, ws)[0] - lead));
    }
  }
  wm.interval_accuracy.assign(k, kNaN);
  for (std::size_t c = 0; c < k; ++c) {
    if (wm.interval_support[c] > 0)
      wm.interval_accuracy[c] = static_cast<double>(correct[c]) / static_cast<double>(wm.interval_support[c]);
  }
  if (!errors.empty()) {
    RegressorErrors e;
    e.count = errors.size();
    e.mean = *mean_of(errors);
    std::sort(errors.begin(), errors.end());
    e.max = errors.back();
    const std::size_t h = errors.size() / 2;
    e.median = errors.size() % 2 ? errors[h] : 0.5 * (errors[h - 1] + errors[h]);
    wm.regressor = e;
  }
  return wm;
}

EvalReport evaluate(const pipeline::PipelineBundle& bundle, std::span<const sim::Trajectory> trajectories) {
  if (trajectories.empty()) throw DataError("evaluation needs at least one trajectory");
  const auto verdicts = stream_verdicts(bundle, trajectories);
  return aggregate(verdicts, window_metrics(bundle, trajectories));
}

sim::Trajectory trim_trajectory(const sim::Trajectory& traj, double height) {
  sim::Trajectory out = traj;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    if (out.samples[i].com.z < height) {
      out.samples.resize(i + 1);
      break;
    }
  }
  return out;
}

EvalReport trimmed_evaluate(const pipeline::PipelineBundle& bundle, std::span<const sim::Trajectory> trajectories,
                            double trim_height) {
  std::vector<sim::Trajectory> trimmed;
  trimmed.reserve(trajectories.size());
  for (const auto& t : trajectories) trimmed.push_back(trim_trajectory(t, trim_height));
  std::vector<sim::Trajectory> usable;
  for (auto& t : trimmed)
    if (t.size() >= bundle.window.length) usable.push_back(std::move(t));
  return evaluate(bundle, usable);
}

std::vector<HistogramBin> lead_histogram(std::span<const data::WindowLabel> windows, double bin_width) {
  if (!(bin_width > 0.0)) throw ConfigError("histogram bin width must be positive");
  const Micros width = to_micros(bin_width);
  if (width <= Micros{0}) throw ConfigError("histogram bin width is below one microsecond");
  std::vector<HistogramBin> bins;
  for (const auto& w : windows) {
    if (!w.lead) continue;
    const auto k = static_cast<std::size_t>(*w.lead / width);
    if (k >= bins.size()) {
      const std::size_t old = bins.size();
      bins.resize(k + 1);
      for (std::size_t j = old; j <= k; ++j) bins[j].start = width * static_cast<std::int64_t>(j);
    }
    ++bins[k].count;
  }
  return bins;
}

std::vector<data::WindowLabel> unclipped_fault_labels(std::span<const sim::Trajectory> trajectories,
                                                      const data::WindowParams& params) {
  std::vector<data::WindowLabel> out;
  for (const auto& t : trajectories) {
    if (t.size() < params.length) continue;
    for (const auto& w : data::index_windows(t, 0, params)) {
      if (!w.label.fault) continue;
      out.push_back(data::label_window(t, w.end, Micros::max()));
    }
  }
  return out;
}

void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins) {
  out << "bin_start,count\n";
  for (const auto& b : bins) out << format_double(to_seconds(b.start)) << ',' << b.count << '\n';
}

void write_verdicts_csv(std::ostream& out, std::span<const TrajectoryVerdict> verdicts) {
  auto us = [](const std::optional<Micros>& t) { return t ? format_double(to_seconds(*t)) : std::string(); };
  out << "id,kind,unsafe,detection,lead,predicted_lead,response\n";
  for (const auto& v : verdicts) {
    out << v.id << ',' << forces::to_string(v.kind) << ',' << (v.unsafe ? 1 : 0) << ',' << us(v.detection) << ','
        << us(v.lead) << ',' << opt_text(v.predicted_lead) << ',' << us(v.response) << '\n';
  }
}

void EvalReport::write_text(std::ostream& out) const {
  char line[256];
  std::snprintf(line, sizeof line, "%-13s %5s %5s %6s %6s %6s %9s %8s %9s %9s %7s\n", "fault", "n", "safe", "unsafe",
                "FPR", "FNR", "mean lead", "min lead", "response", "pred lead", "gap");
  out << line;
  for (const auto& g : groups) {
    std::snprintf(line, sizeof line, "%-13s %5zu %5zu %6zu %6.3f %6.3f %9s %8s %9s %9s %7s\n", g.name.c_str(),
                  g.trajectories, g.safe, g.unsafe, g.fpr, g.fnr, cell(g.mean_lead).c_str(), cell(g.min_lead).c_str(),
                  cell(g.mean_response).c_str(), cell(g.mean_predicted_lead).c_str(), cell(g.lead_gap).c_str());
    out << line;
  }
  static constexpr const char* kIntervals[] = {"[0,1)", "[1,2)", "[2,H]"};
  out << "\ninterval classifier accuracy\n";
  for (std::size_t c = 0; c < windows.interval_accuracy.size(); ++c) {
    const double a = windows.interval_accuracy[c];
    std::snprintf(line, sizeof line, "  %-6s %7s  (%zu windows)\n", c < 3 ? kIntervals[c] : "?",
                  std::isnan(a) ? "-" : cell(a).c_str(), windows.interval_support[c]);
    out << line;
  }
  out << "\nlead regressor absolute error (s)\n";
  if (windows.regressor) {
    const auto& e = *windows.regressor;
    std::snprintf(line, sizeof line, "  max %.3f  mean %.3f  median %.3f  (%zu windows)\n", e.max, e.mean, e.median,
                  e.count);
    out << line;
  } else {
    out << "  no windows with lead in [0,1)\n";
  }
}

void EvalReport::write_csv(std::ostream& out) const {
  out << "scope,metric,value\n";
  for (const auto& g : groups) {
    auto row = [&](const char* metric, const std::string& value) {
      out << g.name << ',' << metric << ',' << value << '\n';
    };
    row("trajectories", std::to_string(g.trajectories));
    row("safe", std::to_string(g.safe));
    row("unsafe", std::to_string(g.unsafe));
    row("detected", std::to_string(g.detected));
    row("fpr", format_double(g.fpr));
    row("fnr", format_double(g.fnr));
    row("mean_lead", opt_text(g.mean_lead));
    row("min_lead", opt_text(g.min_lead));
    row("mean_response", opt_text(g.mean_response));
    row("mean_predicted_lead", opt_text(g.mean_predicted_lead));
    row("lead_gap", opt_text(g.lead_gap));
  }
  for (std::size_t c = 0; c < windows.interval_accuracy.size(); ++c) {
    out << "interval,accuracy_" << c << ',' << format_double(windows.interval_accuracy[c]) << '\n';
    out << "interval,support_" << c << ',' << windows.interval_support[c] << '\n';
  }
  if (windows.regressor) {
    const auto& e = *windows.regressor;
    out << "regressor,count," << e.count << '\n';
    out << "regressor,max," << format_double(e.max) << '\n';
    out << "regressor,mean," << format_double(e.mean) << '\n';
    out << "regressor,median," << format_double(e.median) << '\n';
  }
}

EvalReport EvalReport::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "scope,metric,value") throw DataError("report CSV: missing header");
  EvalReport r;
  std::map<std::string, std::size_t> group_index;
  std::map<std::string, std::string> regressor;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = a == std::string::npos ? a : line.find(',', a + 1);
    if (b == std::string::npos) throw DataError("report CSV: malformed line '" + line + "'");
    const std::string scope = line.substr(0, a), metric = line.substr(a + 1, b - a - 1), value = line.substr(b + 1);
    if (scope == "interval") {
      const bool acc = metric.rfind("accuracy_", 0) == 0;
      const std::size_t c = std::stoul(metric.substr(acc ? 9 : 8));
      if (c >= 16) throw DataError("report CSV: implausible interval class");
      if (r.windows.interval_accuracy.size() <= c) {
        r.windows.interval_accuracy.resize(c + 1, kNaN);
        r.windows.interval_support.resize(c + 1, 0);
      }
      if (acc) r.windows.interval_accuracy[c] = parse_double(value);
      else r.windows.interval_support[c] = std::stoul(value);
      continue;
    }
    if (scope == "regressor") {
      regressor[metric] = value;
      continue;
    }
    auto [it, fresh] = group_index.try_emplace(scope, r.groups.size());
    if (fresh) {
      r.groups.emplace_back();
      r.groups.back().name = scope;
    }
    GroupMetrics& g = r.groups[it->second];
    if (metric == "trajectories") g.trajectories = std::stoul(value);
    else if (metric == "safe") g.safe = std::stoul(value);
    else if (metric == "unsafe") g.unsafe = std::stoul(value);
    else if (metric == "detected") g.detected = std::stoul(value);
    else if (metric == "fpr") g.fpr = parse_double(value);
    else if (metric == "fnr") g.fnr = parse_double(value);
    else if (metric == "mean_lead") g.mean_lead = opt_parse(value);
    else if (metric == "min_lead") g.min_lead = opt_parse(value);
    else if (metric == "mean_response") g.mean_response = opt_parse(value);
    else if (metric == "mean_predicted_lead") g.mean_predicted_lead = opt_parse(value);
    else if (metric == "lead_gap") g.lead_gap = opt_parse(value);
    else throw DataError("report CSV: unknown metric '" + metric + "'");
  }
  if (!regressor.empty()) {
    try {
      r.windows.regressor = RegressorErrors{std::stoul(regressor.at("count")), parse_double(regressor.at("max")),
                                            parse_double(regressor.at("mean")), parse_double(regressor.at("median"))};
    } catch (const std::out_of_range&) {
      throw DataError("report CSV: incomplete regressor block");
    }
  }
  return r;
}

bool same_report(const EvalReport& a, const EvalReport& b) {
  if (a.groups != b.groups) return false;
  if (a.windows.interval_support != b.windows.interval_support) return false;
  if (a.windows.regressor != b.windows.regressor) return false;
  if (a.windows.interval_accuracy.size() != b.windows.interval_accuracy.size()) return false;
  for (std::size_t i = 0; i < a.windows.interval_accuracy.size(); ++i)
    if (!same_double(a.windows.interval_accuracy[i], b.windows.interval_accuracy[i])) return false;
  return true;
}

}  // namespace fallpred::eval
