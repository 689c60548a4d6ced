#include "fallpred/cli/commands.hpp"

#include <algorithm>
#include <future>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>

#include <json.hpp>

#include "fallpred/data/drift.hpp"
#include "fallpred/error.hpp"
#include "fallpred/format.hpp"
#include "fallpred/parallel.hpp"
#include "fallpred/rng.hpp"
#include "fallpred/sim/trajectory_io.hpp"

namespace fallpred::cli {

namespace {

using forces::FaultKind;
using nlohmann::json;

// Seed streams beyond the per-trajectory ones.
constexpr std::uint64_t kSplitStream = 1ULL << 40;
constexpr std::uint64_t kFaultStream = kSplitStream + 1;
constexpr std::uint64_t kIntervalStream = kSplitStream + 2;
constexpr std::uint64_t kLeadStream = kSplitStream + 3;

json ranges_json(const forces::ForceRanges& r) {
  return {{"abrupt_boundary", r.abrupt_boundary}, {"abrupt_bound", r.abrupt_bound},
          {"incipient_boundary", r.incipient_boundary}, {"incipient_bound", r.incipient_bound},
          {"prelude_bound", r.prelude_bound}};
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  return out;
}

std::vector<std::uint64_t> ids_of(const std::vector<const sim::Trajectory*>& ts) {
  std::vector<std::uint64_t> ids;
  for (const auto* t : ts) ids.push_back(t->id);
  return ids;
}

train::TrainConfig job_config(const RunConfig& config, std::size_t epochs, std::uint64_t stream) {
  train::TrainConfig c = config.network;
  c.epochs = epochs;
  c.seed = derive_seed(config.seed, stream);
  return c;
}

bool fault_window(const data::WindowLabel& l) { return l.fault; }
bool short_lead_window(const data::WindowLabel& l) { return l.fault && l.lead_seconds() < 1.0; }

void write_log(const std::filesystem::path& file, const train::TrainingLog& log) {
  auto out = open_out(file);
  log.write_csv(out);
}

}  // namespace

std::vector<sim::Trajectory> generate_trajectories(const RunConfig& config, const forces::ForceRanges& ranges) {
  std::vector<FaultKind> kinds;
  kinds.insert(kinds.end(), config.abrupt_count, FaultKind::abrupt);
  kinds.insert(kinds.end(), config.incipient_count, FaultKind::incipient);
  kinds.insert(kinds.end(), config.intermittent_count, FaultKind::intermittent);

  std::vector<sim::Trajectory> out(kinds.size());
  parallel_for(kinds.size(), [&](std::size_t i) {
    sim::SimConfig sc = config.sim;
    sc.seed = derive_seed(config.seed, i);
    Rng rng(sc.seed);
    const auto profile = forces::sample_profile(kinds[i], rng, ranges, config.timing);
    out[i] = sim::run_episode(profile, config.robot, sc);
    out[i].id = i;
  });
  return out;
}

void cmd_generate(const RunConfig& config, const std::filesystem::path& out, std::ostream& log) {
  config.validate();
  const auto ranges = sim::calibrate_force_ranges(config.robot, config.sim);
  log << "calibrated fall boundaries: abrupt " << format_double(ranges.abrupt_boundary) << " N, incipient "
      << format_double(ranges.incipient_boundary) << " N\n";
  const auto trajectories = generate_trajectories(config, ranges);

  json extra = {{"seed", config.seed}, {"ranges", ranges_json(ranges)}};
  sim::write_trajectory_set(out, trajectories, extra);
  write_config_snapshot(out, config);

  for (FaultKind kind : {FaultKind::abrupt, FaultKind::incipient, FaultKind::intermittent}) {
    std::size_t safe = 0, unsafe = 0;
    for (const auto& t : trajectories) {
      if (t.kind() != kind) continue;
      (t.unsafe() ? unsafe : safe)++;
    }
    log << forces::to_string(kind) << ": " << safe << " safe, " << unsafe << " unsafe\n";
  }
  log << "wrote " << trajectories.size() << " trajectories to " << out.string() << '\n';
}

TrainArtifacts train_pipeline(const RunConfig& config, std::span<const sim::Trajectory> input) {
  config.validate();
  std::vector<sim::Trajectory> corrected;
  if (config.drift_correction) {
    for (const auto& t : input) corrected.push_back(data::drift_correct(t));
    input = corrected;
  }

  std::vector<const sim::Trajectory*> pool, intermittent;
  for (const auto& t : input) (t.kind() == FaultKind::intermittent ? intermittent : pool).push_back(&t);
  if (pool.empty()) throw DataError("no abrupt or incipient trajectories to train on");

  auto unsafe = std::make_unique<bool[]>(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) unsafe[i] = pool[i]->unsafe();
  data::SplitSpec spec = config.split;
  spec.seed = derive_seed(config.seed, kSplitStream);
  const data::Split split = data::stratified_split(std::span<const bool>(unsafe.get(), pool.size()), spec);

  std::vector<const sim::Trajectory*> train_set, val_set, test_set;
  for (std::size_t i : split.train) train_set.push_back(pool[i]);
  for (std::size_t i : split.val) val_set.push_back(pool[i]);
  for (std::size_t i : split.test) test_set.push_back(pool[i]);
  test_set.insert(test_set.end(), intermittent.begin(), intermittent.end());
  if (val_set.empty()) throw DataError("validation split is empty; lower split.train_fraction");

  using data::FeatureVariant;
  const auto base_train = data::build_dataset(train_set, config.window, FeatureVariant::base);
  const auto base_val = data::build_dataset(val_set, config.window, FeatureVariant::base);
  const auto ext_train = data::build_dataset(train_set, config.window, FeatureVariant::extended, fault_window);
  const auto ext_val = data::build_dataset(val_set, config.window, FeatureVariant::extended, fault_window);
  const auto lead_train = data::build_dataset(train_set, config.window, FeatureVariant::extended, short_lead_window);
  const auto lead_val = data::build_dataset(val_set, config.window, FeatureVariant::extended, short_lead_window);
  if (ext_train.windows.empty()) throw DataError("training split has no fault-positive windows");
  const auto base_scaler = data::fit_scaler(base_train);
  const auto ext_scaler = data::fit_scaler(ext_train);

  auto fault_job = std::async(std::launch::async, [&] {
    auto model = train::train_fault_classifier(base_train, base_val, base_scaler,
                                               job_config(config, config.fault_epochs, kFaultStream),
                                               train::SaveCriteria(config.max_fpr));
    auto cal = train::calibrate_threshold(model.network, base_val, base_scaler, config.target_fpr);
    model.threshold = cal.threshold;
    return std::make_pair(std::move(model), std::move(cal));
  });
  auto interval_job = std::async(std::launch::async, [&] {
    return train::train_lead_classifier(ext_train, ext_val, ext_scaler,
                                        job_config(config, config.interval_epochs, kIntervalStream));
  });
  auto lead_job = std::async(std::launch::async, [&] {
    return train::train_lead_regressor(lead_train, lead_val, ext_scaler,
                                       job_config(config, config.lead_epochs, kLeadStream));
  });
  auto [fault, cal] = fault_job.get();
  auto interval = interval_job.get();
  auto lead = lead_job.get();

  TrainArtifacts a{{std::move(fault), std::move(interval), std::move(lead), base_scaler, ext_scaler, config.window,
                    config.drift_correction},
                   std::move(cal),
                   ids_of(train_set),
                   ids_of(val_set),
                   ids_of(test_set)};
  a.bundle.validate();
  return a;
}

void cmd_train(const RunConfig& config, const std::filesystem::path& data_dir, const std::filesystem::path& out,
               std::ostream& log) {
  const auto trajectories = sim::read_trajectory_set(data_dir);
  log << "loaded " << trajectories.size() << " trajectories from " << data_dir.string() << '\n';
  const TrainArtifacts a = train_pipeline(config, trajectories);

  std::filesystem::create_directories(out);
  pipeline::write_bundle(out / "bundle.fpb", a.bundle);
  {
    auto f = open_out(out / "split.json");
    f << json{{"train", a.train_ids}, {"val", a.val_ids}, {"test", a.test_ids}}.dump(2) << '\n';
  }
  write_log(out / "fault_log.csv", a.bundle.fault.log);
  write_log(out / "interval_log.csv", a.bundle.interval.log);
  write_log(out / "lead_log.csv", a.bundle.lead.log);
  {
    auto f = open_out(out / "threshold.csv");
    f << "threshold,fpr,lead,coverage_lead,window_fpr,positive_windows\n";
    for (const auto& p : a.threshold.grid) {
      f << format_double(p.threshold) << ',' << format_double(p.fpr) << ',' << format_double(p.lead) << ','
        << format_double(p.coverage_lead) << ',' << format_double(p.window_fpr) << ',' << p.positive_windows << '\n';
    }
  }
  write_config_snapshot(out, config);

  for (const auto* m : {&a.bundle.fault, &a.bundle.interval, &a.bundle.lead}) {
    log << train::to_string(m->task) << " model: ";
    if (m->log.saved_epoch) log << "kept epoch " << *m->log.saved_epoch << '\n';
    else log << "warning: " << m->log.warning << '\n';
  }
  log << "threshold " << format_double(a.threshold.threshold) << ": val FPR " << format_double(a.threshold.chosen.fpr)
      << ", val lead " << format_double(a.threshold.chosen.lead) << " s (at 0.5: FPR "
      << format_double(a.threshold.at_default.fpr) << ", lead " << format_double(a.threshold.at_default.lead)
      << " s)\n";
  log << "wrote " << (out / "bundle.fpb").string() << '\n';
}

std::vector<sim::Trajectory> select_for_eval(std::vector<sim::Trajectory> all, const std::filesystem::path& bundle,
                                             std::optional<FaultKind> kind) {
  const auto split_file = bundle.parent_path() / "split.json";
  std::optional<std::set<std::uint64_t>> test;
  if (std::filesystem::exists(split_file)) {
    std::ifstream in(split_file);
    try {
      test = json::parse(in).at("test").get<std::set<std::uint64_t>>();
    } catch (const json::exception& e) {
      throw DataError("unreadable " + split_file.string() + ": " + e.what());
    }
  }
  std::vector<sim::Trajectory> out;
  for (auto& t : all) {
    if (test && !test->count(t.id)) continue;
    if (kind && t.kind() != *kind) continue;
    out.push_back(std::move(t));
  }
  return out;
}

eval::EvalReport cmd_eval(const RunConfig& config, const std::filesystem::path& bundle_file,
                          const std::filesystem::path& data_dir, const std::filesystem::path& out,
                          std::optional<FaultKind> kind, std::optional<double> trim_height, std::ostream& log) {
  const auto bundle = pipeline::read_bundle(bundle_file);
  auto set = select_for_eval(sim::read_trajectory_set(data_dir), bundle_file, kind);
  if (trim_height) {
    const double lo = config.sim.fall_threshold(config.robot), hi = config.robot.nominal_com_height();
    if (!(*trim_height >= lo && *trim_height <= hi))
      throw ConfigError("trim height must lie between the fall height " + format_double(lo) +
                        " m and the nominal CoM height " + format_double(hi) + " m");
    std::vector<sim::Trajectory> trimmed;
    for (const auto& t : set) {
      auto c = eval::trim_trajectory(t, *trim_height);
      if (c.size() >= bundle.window.length) trimmed.push_back(std::move(c));
    }
    set = std::move(trimmed);
  }
  if (set.empty()) throw DataError("no trajectories left to evaluate");

  const auto verdicts = eval::stream_verdicts(bundle, set);
  const auto report = eval::aggregate(verdicts, eval::window_metrics(bundle, set));
  const auto bins = eval::lead_histogram(eval::unclipped_fault_labels(set, bundle.window), config.histogram_bin);

  std::filesystem::create_directories(out);
  {
    auto f = open_out(out / "report.txt");
    report.write_text(f);
  }
  {
    auto f = open_out(out / "report.csv");
    report.write_csv(f);
  }
  {
    auto f = open_out(out / "verdicts.csv");
    eval::write_verdicts_csv(f, verdicts);
  }
  {
    auto f = open_out(out / "histogram.csv");
    eval::write_histogram_csv(f, bins);
  }
  write_config_snapshot(out, config);
  report.write_text(log);
  return report;
}

int cmd_predict(const RunConfig& config, const std::filesystem::path& bundle_file,
                const std::filesystem::path& trajectory, const std::filesystem::path& out, std::ostream& log) {
  const auto bundle = pipeline::read_bundle(bundle_file);
  const auto traj = sim::read_trajectory_file(trajectory);
  const auto r = pipeline::predict_stream(bundle, traj);

  std::filesystem::create_directories(out);
  auto f = open_out(out / "predictions.csv");
  f << "t,probability,fault,interval,lead\n";
  for (const auto& s : r.steps) {
    const auto& p = s.prediction;
    f << format_double(to_seconds(s.time)) << ',' << format_double(p.probability) << ',' << (p.fault ? 1 : 0) << ','
      << (p.interval ? std::to_string(*p.interval) : std::string()) << ','
      << (p.lead ? format_double(*p.lead) : std::string()) << '\n';
  }
  write_config_snapshot(out, config);
  if (!r.first_detection) {
    log << "no fault flagged\n";
    return kExitOk;
  }
  log << "fault flagged at t = " << format_double(to_seconds(*r.first_detection)) << " s";
  if (r.lead_at_detection) log << ", predicted lead " << format_double(*r.lead_at_detection) << " s";
  log << '\n';
  return kExitFaultFlagged;
}

}  // namespace fallpred::cli
