#include "fallpred/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "fallpred/error.hpp"
#include "fallpred/format.hpp"
#include "fallpred/rng.hpp"

namespace fallpred::train {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

double mean_loss(const data::Dataset& ds, std::span<const double> outputs, const Objective& objective) {
  if (ds.windows.empty()) return kNaN;
  double sum = 0.0;
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    sum += nn::loss(objective.loss, outputs.subspan(i * objective.outputs, objective.outputs),
                    objective.target(ds.windows[i].label));
  }
  return sum / static_cast<double>(ds.windows.size());
}

void require_windows(const data::Dataset& ds, std::string_view what) {
  if (ds.windows.empty()) throw DataError(std::string(what) + ": training set has no windows");
}

}  // namespace

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::fault: return "fault";
    case TaskKind::interval: return "interval";
    case TaskKind::lead: return "lead";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "fault") return TaskKind::fault;
  if (text == "interval") return TaskKind::interval;
  if (text == "lead") return TaskKind::lead;
  throw ModelError("unknown task kind '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("training: epochs must be at least 1");
  if (batch_size == 0) throw ConfigError("training: batch_size must be at least 1");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("training: learning_rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ConfigError("training: adam betas must lie in [0,1)");
  if (!(adam.epsilon > 0.0)) throw ConfigError("training: adam epsilon must be positive");
}

void TrainingLog::write_csv(std::ostream& out) const {
  out << "epoch,train_loss,val_loss,val_fpr,val_lead,train_fpr,val_score,saved,rule\n";
  for (const auto& r : epochs) {
    out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_loss) << ',';
    if (r.metrics) {
      out << format_double(r.metrics->val_fpr) << ',' << format_double(r.metrics->val_lead) << ','
          << format_double(r.metrics->train_fpr);
    } else {
      out << ",,";
    }
    out << ',' << opt_field(r.val_score) << ',' << (r.saved ? 1 : 0) << ',' << to_string(r.rule) << '\n';
  }
}

Objective fault_objective() {
  return {nn::LossKind::bce, 1, nn::OutputActivation::none,
          [](const data::WindowLabel& l) { return l.fault ? 1.0 : 0.0; }};
}

Objective interval_objective() {
  return {nn::LossKind::ce, static_cast<std::size_t>(data::kIntervalCount), nn::OutputActivation::none,
          [](const data::WindowLabel& l) { return static_cast<double>(l.interval); }};
}

Objective lead_objective() {
  return {nn::LossKind::mse, 1, nn::OutputActivation::sigmoid,
          [](const data::WindowLabel& l) { return l.lead_seconds(); }};
}

nn::NetworkSpec network_spec(const data::Dataset& ds, const TrainConfig& c, const Objective& o) {
  nn::NetworkSpec s;
  s.window_length = ds.params.length;
  s.channels = data::feature_dim(ds.variant);
  s.filters = c.filters;
  s.kernel = c.kernel;
  s.stride = c.stride;
  s.pool = c.pool;
  s.hidden = c.hidden;
  s.outputs = o.outputs;
  s.output = o.output;
  s.validate();
  return s;
}

nn::Network fit(const data::Dataset& train, const data::ScalerParams& scaler, const Objective& objective,
                const TrainConfig& config, const std::function<bool(const nn::Network&, EpochRecord&)>& on_epoch,
                TrainingLog& log) {
  config.validate();
  nn::Network net(network_spec(train, config, objective));
  net.initialize(derive_seed(config.seed, 0));
  nn::Adam adam(config.adam);
  Rng rng(derive_seed(config.seed, 1));

  const std::size_t n = train.windows.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  nn::ParamSet grads = net.params().zeros_like();
  nn::Workspace ws;
  std::vector<double> x(train.window_size());
  std::optional<nn::Network> kept;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      grads.fill(0.0);
      for (std::size_t k = start; k < stop; ++k) {
        train.materialize(order[k], scaler, x);
        loss_sum += net.backward(x, objective.target(train.windows[order[k]].label), objective.loss, grads, ws);
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (auto& t : grads.tensors)
        for (double& g : t.values) g *= scale;
      adam.step(net.params(), grads);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(n);
    record.saved = on_epoch(net, record);
    if (record.saved) {
      kept = net;
      log.saved_epoch = epoch;
    }
    log.epochs.push_back(record);
  }
  if (!kept) {
    log.warning = "no epoch met the saving criteria; keeping the last epoch";
    return net;
  }
  return *kept;
}

std::vector<double> predict_windows(const nn::Network& net, const data::Dataset& ds,
                                    const data::ScalerParams& scaler) {
  const std::size_t outputs = net.spec().outputs;
  std::vector<double> out(ds.windows.size() * outputs);
  nn::Workspace ws;
  std::vector<double> x(ds.window_size());
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    ds.materialize(i, scaler, x);
    const auto y = net.forward(x, ws);
    std::copy(y.begin(), y.end(), out.begin() + static_cast<std::ptrdiff_t>(i * outputs));
  }
  return out;
}

std::vector<double> fault_probabilities(const nn::Network& net, const data::Dataset& ds,
                                        const data::ScalerParams& scaler) {
  if (net.spec().outputs != 1) throw ModelError("fault classifier must have a single output");
  auto p = predict_windows(net, ds, scaler);
  if (net.spec().output == nn::OutputActivation::none)
    for (double& v : p) v = nn::sigmoid(v);
  return p;
}

std::vector<eval::TrajectoryVerdict> verdicts_at(const data::Dataset& ds, std::span<const double> probabilities,
                                                 double threshold) {
  if (probabilities.size() != ds.windows.size()) throw ModelError("probability count does not match windows");
  std::vector<std::optional<Micros>> detection(ds.series.size());
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    const auto& w = ds.windows[i];
    if (probabilities[i] >= threshold && !detection[w.series]) detection[w.series] = w.label.end_time;
  }
  std::vector<eval::TrajectoryVerdict> out;
  out.reserve(ds.series.size());
  for (std::size_t s = 0; s < ds.series.size(); ++s) {
    const auto& info = ds.info[s];
    out.push_back(eval::make_verdict({info.id, info.kind, info.fault_time, info.fall_time, detection[s], {}}));
  }
  return out;
}

TrainedModel train_fault_classifier(const data::Dataset& train, const data::Dataset& val,
                                    const data::ScalerParams& scaler, const TrainConfig& config,
                                    SaveCriteria criteria) {
  require_windows(train, "fault classifier");
  if (train.variant != data::FeatureVariant::base) throw DataError("fault classifier expects base features");
  const Objective objective = fault_objective();
  TrainingLog log;
  auto on_epoch = [&](const nn::Network& net, EpochRecord& r) {
    const auto val_out = predict_windows(net, val, scaler);
    r.val_loss = mean_loss(val, val_out, objective);
    std::vector<double> val_p(val_out);
    for (double& v : val_p) v = nn::sigmoid(v);
    const auto train_p = fault_probabilities(net, train, scaler);
    const auto val_v = verdicts_at(val, val_p, 0.5);
    const auto train_v = verdicts_at(train, train_p, 0.5);
    EpochMetrics m{eval::false_positive_rate(val_v), eval::mean_lead(val_v), eval::false_positive_rate(train_v)};
    r.metrics = m;
    r.rule = criteria.consider(m);
    return r.rule != SaveRule::none;
  };
  nn::Network net = fit(train, scaler, objective, config, on_epoch, log);
  return {TaskKind::fault, std::move(net), 0.5, std::move(log)};
}

int argmax_class(std::span<const double> logits) {
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

IntervalAccuracy interval_accuracy(const nn::Network& net, const data::Dataset& ds,
                                   const data::ScalerParams& scaler) {
  const auto out = predict_windows(net, ds, scaler);
  const std::size_t k = net.spec().outputs;
  std::vector<std::size_t> correct(k, 0);
  IntervalAccuracy acc;
  acc.support.assign(k, 0);
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    const int truth = ds.windows[i].label.interval;
    if (truth < 0 || truth >= static_cast<int>(k)) continue;
    ++acc.support[truth];
    if (argmax_class(std::span<const double>(out).subspan(i * k, k)) == truth) ++correct[truth];
  }
  acc.per_class.assign(k, kNaN);
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (acc.support[c] == 0) continue;
    acc.per_class[c] = static_cast<double>(correct[c]) / static_cast<double>(acc.support[c]);
    sum += acc.per_class[c];
    ++present;
  }
  acc.macro = present == 0 ? kNaN : sum / static_cast<double>(present);
  return acc;
}

TrainedModel train_lead_classifier(const data::Dataset& train, const data::Dataset& val,
                                   const data::ScalerParams& scaler, const TrainConfig& config) {
  require_windows(train, "lead classifier");
  std::vector<std::size_t> counts(data::kIntervalCount, 0);
  for (const auto& w : train.windows) {
    if (!w.label.fault || w.label.interval < 0) throw DataError("lead classifier: training window without a fault label");
    ++counts[w.label.interval];
  }
  static constexpr const char* kNames[] = {"[0,1)", "[1,2)", "[2,H]"};
  for (int c = 0; c < data::kIntervalCount; ++c)
    if (counts[c] == 0) throw DataError(std::string("lead classifier: no training windows in interval ") + kNames[c]);

  const Objective objective = interval_objective();
  TrainingLog log;
  double best = -std::numeric_limits<double>::infinity();
  auto on_epoch = [&](const nn::Network& net, EpochRecord& r) {
    r.val_loss = mean_loss(val, predict_windows(net, val, scaler), objective);
    const double macro = interval_accuracy(net, val, scaler).macro;
    r.val_score = macro;
    if (!(macro > best)) return false;
    best = macro;
    return true;
  };
  nn::Network net = fit(train, scaler, objective, config, on_epoch, log);
  return {TaskKind::interval, std::move(net), 0.5, std::move(log)};
}

TrainedModel train_lead_regressor(const data::Dataset& train, const data::Dataset& val,
                                  const data::ScalerParams& scaler, const TrainConfig& config) {
  if (train.windows.empty()) throw DataError("lead regressor: no training windows with lead in [0,1)");
  for (const auto& w : train.windows) {
    const double l = w.label.lead_seconds();
    if (!w.label.fault || !(l >= 0.0 && l < 1.0)) throw DataError("lead regressor: training target outside [0,1)");
  }
  const Objective objective = lead_objective();
  TrainingLog log;
  double best = std::numeric_limits<double>::infinity();
  auto on_epoch = [&](const nn::Network& net, EpochRecord& r) {
    const auto out = predict_windows(net, val, scaler);
    r.val_loss = mean_loss(val, out, objective);
    double sum = 0.0;
    for (std::size_t i = 0; i < val.windows.size(); ++i) sum += std::abs(out[i] - val.windows[i].label.lead_seconds());
    const double mae = val.windows.empty() ? kNaN : sum / static_cast<double>(val.windows.size());
    r.val_score = mae;
    if (!(mae < best)) return false;
    best = mae;
    return true;
  };
  nn::Network net = fit(train, scaler, objective, config, on_epoch, log);
  return {TaskKind::lead, std::move(net), 0.5, std::move(log)};
}

std::vector<ThresholdPoint> threshold_sweep(const data::Dataset& ds, std::span<const double> probabilities,
                                            std::span<const double> thresholds) {
  std::size_t negatives = 0, unsafe = 0;
  for (const auto& w : ds.windows)
    if (!w.label.fault) ++negatives;
  for (const auto& info : ds.info)
    if (info.unsafe()) ++unsafe;

  std::vector<ThresholdPoint> out;
  out.reserve(thresholds.size());
  for (const double p : thresholds) {
    ThresholdPoint pt;
    pt.threshold = p;
    std::size_t flagged_negative = 0;
    for (std::size_t i = 0; i < ds.windows.size(); ++i) {
      if (probabilities[i] < p) continue;
      ++pt.positive_windows;
      if (!ds.windows[i].label.fault) ++flagged_negative;
    }
    pt.window_fpr = negatives == 0 ? 0.0 : static_cast<double>(flagged_negative) / static_cast<double>(negatives);
    const auto verdicts = verdicts_at(ds, probabilities, p);
    pt.fpr = eval::false_positive_rate(verdicts);
    pt.lead = eval::mean_lead(verdicts);
    double lead_sum = 0.0;
    for (const auto& v : verdicts)
      if (v.lead) lead_sum += to_seconds(*v.lead);
    pt.coverage_lead = unsafe == 0 ? 0.0 : lead_sum / static_cast<double>(unsafe);
    out.push_back(pt);
  }
  return out;
}

ThresholdCalibration calibrate_threshold(const data::Dataset& val, std::span<const double> probabilities,
                                         double target_fpr) {
  if (!(target_fpr >= 0.0 && target_fpr <= 1.0)) throw ConfigError("threshold: target FPR must lie in [0,1]");
  std::vector<double> grid;
  for (int k = 1; k <= 99; ++k) grid.push_back(k / 100.0);
  ThresholdCalibration cal;
  cal.grid = threshold_sweep(val, probabilities, grid);
  const double half = 0.5;
  cal.at_default = threshold_sweep(val, probabilities, std::span<const double>(&half, 1)).front();
  for (const auto& pt : cal.grid) {
    if (pt.fpr <= target_fpr) {
      cal.threshold = pt.threshold;
      cal.chosen = pt;
      return cal;
    }
  }
  double best = 1.0;
  for (const auto& pt : cal.grid) best = std::min(best, pt.fpr);
  throw ModelError("threshold: target FPR " + format_double(target_fpr) +
                   " is unattainable; best achievable on the grid is " + format_double(best) + " at p = 0.99");
}

ThresholdCalibration calibrate_threshold(const nn::Network& net, const data::Dataset& val,
                                         const data::ScalerParams& scaler, double target_fpr) {
  return calibrate_threshold(val, fault_probabilities(net, val, scaler), target_fpr);
}

}  // namespace fallpred::train
