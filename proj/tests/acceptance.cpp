// Acceptance checks; prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Scratch output goes under the system temp directory.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "fallpred/cli/commands.hpp"
#include "fallpred/data/drift.hpp"
#include "fallpred/forces/force_profile.hpp"
#include "fallpred/sim/trajectory_io.hpp"
#include "gradcheck.hpp"
#include "labeling_oracle.hpp"
#include "support.hpp"

using namespace fallpred;
using forces::FaultKind;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const Outcome& o, double seconds) {
  std::printf("%s %2d %-34s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), seconds);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

void run(int id, const char* title, const std::function<Outcome()>& fn) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  report(id, title, o, std::chrono::duration<double>(Clock::now() - t0).count());
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fallpred_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

Outcome gradients() {
  Rng rng(2024);
  double worst = 0.0;
  std::size_t checked = 0, kinks = 0;
  for (nn::LossKind loss : {nn::LossKind::bce, nn::LossKind::ce, nn::LossKind::mse}) {
    for (int k = 0; k < 20; ++k) {
      const auto spec = testing::random_spec(rng, loss);
      nn::Network net(spec);
      net.initialize(rng.next());
      std::vector<double> x(spec.input_size());
      for (double& v : x) v = rng.uniform(-1.0, 1.0);
      const auto g = testing::gradient_check(net, x, testing::random_target(rng, spec, loss), loss);
      worst = std::max(worst, g.max_rel_error);
      checked += g.checked;
      kinks += g.kinks;
    }
  }
  return {worst < 1e-4 && checked > 0,
          fmt("60 networks, %zu parameters, max rel err %.2e (%zu kinks skipped)", checked, worst, kinks)};
}

Outcome labeling() {
  Rng rng(77);
  std::size_t windows = 0, mismatches = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 20 + rng.below(400);
    const Micros start{1'000'000};
    std::optional<Micros> fault, fall;
    if (rng.below(4) != 0) fault = start + Micros{10'000 * static_cast<std::int64_t>(rng.below(n))};
    if (fault && rng.below(3) != 0) fall = start + Micros{static_cast<std::int64_t>(rng.below(n * 10'000 + 5'000))};
    const auto t = testing::synthetic_trajectory(k, n, start, fault, fall, rng);
    data::WindowParams wp;
    wp.length = 1 + rng.below(40);
    wp.stride = 1 + rng.below(3);
    wp.horizon = 2.01 + rng.uniform() * 3;
    const auto set = data::make_windows(t, wp);
    const auto oracle = testing::brute_force_labels(t, wp.length, wp.stride, wp.horizon);
    if (set.windows.size() != oracle.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      const auto& l = set.windows[i].label;
      const bool same = set.windows[i].end_index == oracle[i].end && l.fault == oracle[i].fault &&
                        l.interval == oracle[i].interval && l.lead.has_value() == oracle[i].lead_us.has_value() &&
                        (!l.lead || l.lead->count() == *oracle[i].lead_us);
      mismatches += !same;
      ++windows;
    }
  }
  return {mismatches == 0, fmt("100 trajectories, %zu windows, %zu mismatches", windows, mismatches)};
}

Outcome force_analytics() {
  using namespace forces;
  double err = 0.0;
  // ramp completion at A/s
  const double a = 57.6, s = 480.0, hold = 1.0, t0 = 3.0;
  err = std::max(err, std::abs(a / s - 0.12));
  err = std::max(err, std::abs(trapezoid_force(t0, a, s, hold, t0 + 0.12) - a));
  err = std::max(err, std::abs(trapezoid_force(t0, a, s, hold, t0 + 0.06) - a / 2));
  // impulse support measured by bisection on both edges
  const double start = 2.37, dur = 0.075;
  auto edge = [&](double lo, double hi, bool rising) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const bool on = impulse_force(start, 100.0, dur, mid) != 0.0;
      ((on == rising) ? hi : lo) = mid;
    }
    return hi;
  };
  const double measure = edge(start + 0.01, start + 0.2, false) - edge(start - 0.1, start + 0.01, true);
  err = std::max(err, std::abs(measure - 0.075));
  // intermittent superposition
  ForceProfile p;
  p.kind = FaultKind::intermittent;
  p.perturbation_amplitude = 25.0;
  p.first_kind = FaultKind::incipient;
  p.fault_start = 2.31;
  p.amplitude = 18.0;
  p.gap = 1.2;
  p.second_kind = FaultKind::abrupt;
  p.second_amplitude = 160.0;
  p.validate();
  const auto [first, second] = split_intermittent(p);
  for (int i = 0; i <= 80000; ++i) {
    const double t = i * 1e-4;
    const double prelude = impulse_force(p.perturbation_start, p.perturbation_amplitude, p.perturbation_duration, t);
    err = std::max(err, std::abs(force_at(p, t) - (prelude + force_at(first, t) + force_at(second, t))));
  }
  return {err <= 1e-9, fmt("max deviation %.2e (ramp, impulse support %.12f s, superposition)", err, measure)};
}

struct MainRun {
  cli::RunConfig config;
  std::vector<sim::Trajectory> all;
  std::vector<sim::Trajectory> test;
  pipeline::PipelineBundle bundle;
  eval::EvalReport report;
  double seconds = 0.0;
};

MainRun main_run(const fs::path& config_file) {
  const auto config = cli::load_config(config_file);
  const fs::path data = scratch("data"), model = scratch("model"), out = scratch("eval");
  std::ostringstream log;
  const auto t0 = Clock::now();
  cli::cmd_generate(config, data, log);
  cli::cmd_train(config, data, model, log);
  auto report = cli::cmd_eval(config, model / "bundle.fpb", data, out, std::nullopt, std::nullopt, log);
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  auto all = sim::read_trajectory_set(data);
  auto test = cli::select_for_eval(all, model / "bundle.fpb", std::nullopt);
  return {config, std::move(all), std::move(test), pipeline::read_bundle(model / "bundle.fpb"), std::move(report),
          seconds};
}

Outcome balance(const MainRun& r) {
  std::string detail;
  bool ok = true;
  for (FaultKind kind : {FaultKind::abrupt, FaultKind::incipient}) {
    std::size_t n = 0, unsafe = 0;
    for (const auto& t : r.all) {
      if (t.kind() != kind) continue;
      ++n;
      unsafe += t.unsafe();
    }
    const double frac = n ? static_cast<double>(unsafe) / n : 0.0;
    ok = ok && n >= 200 && std::abs(frac - 0.5) <= 0.1;
    detail += fmt("%s %zu/%zu unsafe (%.3f)  ", std::string(forces::to_string(kind)).c_str(), unsafe, n, frac);
  }
  return {ok, detail};
}

Outcome end_to_end(const MainRun& r) {
  std::string detail;
  bool ok = r.seconds <= 900.0;
  for (const char* kind : {"abrupt", "incipient", "intermittent"}) {
    const auto& g = r.report.group(kind);
    const double lead = g.mean_lead.value_or(0.0);
    ok = ok && g.fpr == 0.0 && g.mean_lead && lead >= 0.2;
    detail += fmt("%s FPR %.3f lead %.3f s  ", kind, g.fpr, lead);
  }
  detail += fmt("p* %.2f, %.0f s total", r.bundle.threshold(), r.seconds);
  return {ok, detail};
}

Outcome regressor(const MainRun& r) {
  const auto& e = r.report.windows.regressor;
  if (!e) return {false, "no test windows with lead in [0,1)"};
  return {e->mean <= 0.05 && e->max <= 0.3,
          fmt("%zu windows, mean abs err %.4f s, max %.4f s", e->count, e->mean, e->max)};
}

Outcome intervals(const MainRun& r) {
  const auto& acc = r.report.windows.interval_accuracy;
  const auto& n = r.report.windows.interval_support;
  return {acc[0] >= 0.85 && acc[1] >= 0.75,
          fmt("[0,1) %.3f (%zu)  [1,2) %.3f (%zu)  [2,H] %.3f (%zu, unconstrained)", acc[0], n[0], acc[1], n[1],
              acc[2], n[2])};
}

Outcome tradeoff(const MainRun& r) {
  std::vector<sim::Trajectory> test = r.test;
  if (r.bundle.drift_correction)
    for (auto& t : test) t = data::drift_correct(t);
  const auto ds = data::build_dataset(testing::pointers(test), r.bundle.window, data::FeatureVariant::base);
  const auto p = train::fault_probabilities(r.bundle.fault.network, ds, r.bundle.base_scaler);
  std::vector<double> grid;
  for (int k = 50; k <= 95; ++k) grid.push_back(k / 100.0);
  const auto sweep = train::threshold_sweep(ds, p, grid);
  bool ok = true;
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    ok = ok && sweep[i].window_fpr <= sweep[i - 1].window_fpr && sweep[i].coverage_lead <= sweep[i - 1].coverage_lead;
  }
  return {ok, fmt("window FPR %.4f -> %.4f, lead %.3f -> %.3f s over p* 0.50..0.95", sweep.front().window_fpr,
                  sweep.back().window_fpr, sweep.front().coverage_lead, sweep.back().coverage_lead)};
}

Outcome identity(const MainRun& r) {
  const auto verdicts = eval::stream_verdicts(r.bundle, r.test);
  std::size_t checked = 0, broken = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto& v = verdicts[i];
    const auto& t = r.test[i];
    if (!v.unsafe || !v.detection || !v.response) continue;
    ++checked;
    broken += (*v.response + *v.lead != *t.fall_time - *t.fault_time);
  }
  return {checked > 0 && broken == 0, fmt("%zu detected single-fault trajectories, %zu violations", checked, broken)};
}

Outcome histogram(const MainRun& r) {
  const auto labels = eval::unclipped_fault_labels(r.all, r.config.window);
  const auto bins = eval::lead_histogram(labels, r.config.histogram_bin);
  std::size_t rises = 0;
  for (std::size_t k = 2; k < bins.size(); ++k) rises += bins[k].count > bins[k - 1].count;
  return {!bins.empty() && rises == 0,
          fmt("%zu windows in %zu bins, first %zu, second %zu, %zu increases after the first bin", labels.size(),
              bins.size(), bins[0].count, bins.size() > 1 ? bins[1].count : 0, rises)};
}

Outcome reproducible(const fs::path& config_file) {
  const auto config = cli::load_config(config_file);
  std::ostringstream log;
  std::vector<fs::path> evals;
  for (const char* tag : {"a", "b"}) {
    const fs::path data = scratch(std::string("repro_data_") + tag), model = scratch(std::string("repro_model_") + tag);
    const fs::path out = scratch(std::string("repro_eval_") + tag);
    cli::cmd_generate(config, data, log);
    cli::cmd_train(config, data, model, log);
    cli::cmd_eval(config, model / "bundle.fpb", data, out, std::nullopt, std::nullopt, log);
    evals.push_back(out);
  }
  std::size_t files = 0, differ = 0;
  for (const char* name : {"report.txt", "report.csv", "verdicts.csv", "histogram.csv"}) {
    ++files;
    differ += slurp(evals[0] / name) != slurp(evals[1] / name) || slurp(evals[0] / name).empty();
  }
  return {differ == 0, fmt("%zu report files compared, %zu differ", files, differ)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path configs = argc > 1 ? fs::path(argv[1]) : fs::path(FALLPRED_CONFIG_DIR);
  run(1, "gradient correctness", gradients);
  run(2, "labeling oracle equivalence", labeling);
  run(3, "force-profile analytics", force_analytics);

  std::optional<MainRun> r;
  const auto t0 = Clock::now();
  try {
    r = main_run(configs / "acceptance.ini");
  } catch (const std::exception& e) {
    std::printf("generate/train/eval failed: %s\n", e.what());
  }
  const double setup = std::chrono::duration<double>(Clock::now() - t0).count();
  auto with_run = [&](int id, const char* title, Outcome (*fn)(const MainRun&), double seconds = 0.0) {
    if (!r) {
      report(id, title, {false, "no trained pipeline"}, seconds);
      return;
    }
    const auto t = Clock::now();
    Outcome o;
    try {
      o = fn(*r);
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    report(id, title, o, seconds + std::chrono::duration<double>(Clock::now() - t).count());
  };
  with_run(4, "calibration balance", balance);
  with_run(5, "end-to-end detection", end_to_end, setup);
  with_run(6, "lead regressor error", regressor);
  with_run(7, "interval classifier accuracy", intervals);
  with_run(8, "threshold trade-off", tradeoff);
  with_run(9, "response plus lead identity", identity);
  with_run(10, "lead histogram decay", histogram);
  run(11, "reproducibility", [&] { return reproducible(configs / "smoke.ini"); });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
