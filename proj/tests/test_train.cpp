#include <doctest.h>

#include <algorithm>
#include <array>
#include <sstream>

#include "fallpred/error.hpp"
#include "fallpred/train/trainer.hpp"
#include "support.hpp"

using namespace fallpred;
using namespace fallpred::train;
using testing::step_trajectory;

namespace {

// Independent transcription of the three saving rules over a full history.
std::vector<bool> oracle_saves(const std::vector<EpochMetrics>& h, double max_fpr) {
  std::vector<bool> saved(h.size(), false);
  for (std::size_t e = 0; e < h.size(); ++e) {
    bool rule1 = false, rule2 = false;
    if (e > 0) {
      std::size_t ref = 0;
      for (std::size_t j = 0; j < e; ++j)
        if (saved[j]) ref = j;
      rule1 = h[e].val_fpr < h[ref].val_fpr;
      rule2 = h[e].val_fpr == h[ref].val_fpr && h[e].val_lead > h[ref].val_lead && h[e].train_fpr < h[ref].train_fpr;
    }
    const bool rule3 = h[e].val_fpr <= max_fpr && h[e].train_fpr <= max_fpr;
    saved[e] = rule1 || rule2 || rule3;
  }
  return saved;
}

struct Toy {
  std::vector<sim::Trajectory> train, val;
};

// Unsafe trajectories whose features jump at the fault; safe ones stay flat.
Toy toy_data(std::size_t per_split, std::int64_t fall_after_us = 2'500'000) {
  Toy toy;
  std::uint64_t id = 0;
  for (auto* set : {&toy.train, &toy.val}) {
    for (std::size_t i = 0; i < per_split; ++i) {
      const bool unsafe = i % 2 == 0;
      const std::size_t change = 40 + 3 * i;
      const Micros start{1'000'000};
      const Micros fault = start + Micros{static_cast<std::int64_t>(change) * 10'000};
      if (unsafe) {
        const Micros fall = fault + Micros{fall_after_us};
        const std::size_t n = static_cast<std::size_t>((fall - start).count() / 10'000);
        set->push_back(step_trajectory(id++, n, change, 0.5, fault, fall));
      } else {
        set->push_back(step_trajectory(id++, 400, 400, 0.0, fault, std::nullopt));
      }
    }
  }
  return toy;
}

TrainConfig small_config(std::size_t epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.filters = 4;
  c.kernel = 3;
  c.hidden = 8;
  c.batch_size = 32;
  c.adam.learning_rate = 3e-3;
  return c;
}

data::WindowParams short_windows() {
  data::WindowParams wp;
  wp.length = 10;
  return wp;
}

}  // namespace

TEST_CASE("saving rules on the reference history") {
  const std::vector<EpochMetrics> h = {{0.1, 1.0, 0.1}, {0.05, 1.0, 0.08}, {0.05, 1.2, 0.06}, {0.07, 1.5, 0.06}};
  const auto rules = replay_save_rules(h, 0.0);
  CHECK(rules[0] == SaveRule::none);
  CHECK(rules[1] == SaveRule::fpr_decreased);
  CHECK(rules[2] == SaveRule::lead_increased);
  CHECK(rules[3] == SaveRule::none);
}

TEST_CASE("a vacuous threshold saves every epoch") {
  const std::vector<EpochMetrics> h = {{0.3, 1.0, 0.2}, {0.4, 0.9, 0.5}, {0.9, 0.1, 0.9}, {1.0, 0.0, 1.0}};
  for (SaveRule r : replay_save_rules(h, 1.0)) CHECK(r != SaveRule::none);
  CHECK(replay_save_rules(h, 1.0)[1] == SaveRule::under_threshold);
}

TEST_CASE("saving rules match the oracle on every small history") {
  const std::array<double, 3> fprs = {0.0, 0.05, 0.1};
  const std::array<double, 2> leads = {1.0, 1.5};
  std::vector<EpochMetrics> states;
  for (double v : fprs)
    for (double l : leads)
      for (double t : fprs) states.push_back({v, l, t});
  const std::size_t s = states.size();
  std::size_t histories = 0;
  for (double max_fpr : {0.0, 0.05}) {
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = 0; b < s; ++b)
        for (std::size_t c = 0; c < s; ++c)
          for (std::size_t d = 0; d < s; ++d) {
            const std::vector<EpochMetrics> h = {states[a], states[b], states[c], states[d]};
            const auto rules = replay_save_rules(h, max_fpr);
            const auto expect = oracle_saves(h, max_fpr);
            bool same = true;
            for (int e = 0; e < 4; ++e) same = same && ((rules[e] != SaveRule::none) == expect[e]);
            if (!same) FAIL_CHECK("mismatch on history " << a << ',' << b << ',' << c << ',' << d);
            ++histories;
          }
  }
  CHECK(histories == 2 * s * s * s * s);
}

TEST_CASE("threshold calibration picks the smallest grid value meeting the target") {
  Rng rng(1);
  std::vector<sim::Trajectory> ts;
  ts.push_back(step_trajectory(0, 60, 30, 0.5, Micros{1'300'000}, Micros{1'600'000}));
  ts.push_back(step_trajectory(1, 60, 60, 0.0, Micros{1'300'000}, std::nullopt));
  ts.push_back(step_trajectory(2, 60, 60, 0.0, Micros{1'300'000}, std::nullopt));
  const auto ds = data::build_dataset(testing::pointers(ts), short_windows(), data::FeatureVariant::base);
  std::vector<double> p(ds.windows.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& w = ds.windows[i];
    if (w.series == 0) p[i] = w.label.fault ? 0.95 : 0.2;
    if (w.series == 1 && i % 7 == 0) p[i] = 0.615;  // one safe trajectory fires below 0.62
  }
  const auto cal = calibrate_threshold(ds, p, 0.0);
  CHECK(cal.threshold == doctest::Approx(0.62));
  CHECK(cal.chosen.fpr == 0.0);
  CHECK(cal.at_default.fpr == doctest::Approx(0.5));
  CHECK(calibrate_threshold(ds, p, 1.0).threshold == doctest::Approx(0.01));

  std::size_t last = ds.windows.size() + 1;
  for (const auto& pt : cal.grid) {
    CHECK(pt.positive_windows <= last);
    last = pt.positive_windows;
  }
  std::vector<double> hopeless(p.size(), 1.0);
  CHECK_THROWS_WITH_AS(calibrate_threshold(ds, hopeless, 0.0), doctest::Contains("best achievable"), ModelError);
}

TEST_CASE("fault classifier learns separable data and is reproducible") {
  const Toy toy = toy_data(12);
  const auto wp = short_windows();
  const auto tr = data::build_dataset(testing::pointers(toy.train), wp, data::FeatureVariant::base);
  const auto va = data::build_dataset(testing::pointers(toy.val), wp, data::FeatureVariant::base);
  const auto sc = data::fit_scaler(tr);
  const auto a = train_fault_classifier(tr, va, sc, small_config(3), SaveCriteria(0.0));
  REQUIRE(a.log.saved_epoch);
  const auto p = fault_probabilities(a.network, va, sc);
  CHECK(eval::false_positive_rate(verdicts_at(va, p, 0.5)) == 0.0);
  CHECK(eval::false_negative_rate(verdicts_at(va, p, 0.5)) == 0.0);

  const auto b = train_fault_classifier(tr, va, sc, small_config(3), SaveCriteria(0.0));
  for (std::size_t i = 0; i < a.network.params().tensors.size(); ++i)
    CHECK(a.network.params().tensors[i].values == b.network.params().tensors[i].values);
}

TEST_CASE("regressor converges to a constant target") {
  const Toy toy = toy_data(6);
  const auto ds = data::build_dataset(testing::pointers(toy.train), short_windows(), data::FeatureVariant::extended);
  const auto sc = data::fit_scaler(ds);
  Objective constant = lead_objective();
  constant.target = [](const data::WindowLabel&) { return 0.3; };
  TrainConfig c = small_config(15);
  c.adam.learning_rate = 1e-2;
  TrainingLog log;
  const auto net = fit(ds, sc, constant, c, [](const nn::Network&, EpochRecord&) { return true; }, log);
  const auto out = predict_windows(net, ds, sc);
  for (std::size_t i = 0; i < out.size(); i += 97) CHECK(std::abs(out[i] - 0.3) < 1e-3);
}

TEST_CASE("relabeling every window to one class gives that class full accuracy") {
  const Toy toy = toy_data(6);
  const auto ds = data::build_dataset(testing::pointers(toy.train), short_windows(), data::FeatureVariant::extended);
  const auto sc = data::fit_scaler(ds);
  Objective one = interval_objective();
  one.target = [](const data::WindowLabel&) { return 1.0; };
  TrainingLog log;
  const auto net = fit(ds, sc, one, small_config(2), [](const nn::Network&, EpochRecord&) { return true; }, log);
  const auto out = predict_windows(net, ds, sc);
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    const int cls = argmax_class(std::span<const double>(out).subspan(3 * i, 3));
    CHECK(cls == 1);
  }
}

TEST_CASE("interval classifier trains on all three classes and predicts in range") {
  const Toy toy = toy_data(8, 3'000'000);
  auto fault = [](const data::WindowLabel& l) { return l.fault; };
  const auto wp = short_windows();
  const auto tr = data::build_dataset(testing::pointers(toy.train), wp, data::FeatureVariant::extended, fault);
  const auto va = data::build_dataset(testing::pointers(toy.val), wp, data::FeatureVariant::extended, fault);
  const auto sc = data::fit_scaler(tr);
  const auto m = train_lead_classifier(tr, va, sc, small_config(2));
  CHECK(m.task == TaskKind::interval);
  const auto acc = interval_accuracy(m.network, va, sc);
  CHECK(acc.per_class.size() == 3);
  for (std::size_t c = 0; c < 3; ++c) CHECK(acc.support[c] > 0);
  const auto out = predict_windows(m.network, va, sc);
  for (std::size_t i = 0; i < va.windows.size(); ++i) {
    const int cls = argmax_class(std::span<const double>(out).subspan(3 * i, 3));
    CHECK(cls >= 0);
    CHECK(cls <= 2);
  }
}

TEST_CASE("interval classifier refuses a missing class") {
  const Toy toy = toy_data(6, 900'000);
  auto fault = [](const data::WindowLabel& l) { return l.fault; };
  const auto ds = data::build_dataset(testing::pointers(toy.train), short_windows(), data::FeatureVariant::extended,
                                      fault);
  const auto sc = data::fit_scaler(ds);
  CHECK_THROWS_WITH_AS(train_lead_classifier(ds, ds, sc, small_config(1)), doctest::Contains("[1,2)"), DataError);
}

TEST_CASE("regressor needs windows with short leads") {
  const Toy toy = toy_data(4);
  auto none = [](const data::WindowLabel&) { return false; };
  const auto ds = data::build_dataset(testing::pointers(toy.train), short_windows(), data::FeatureVariant::extended,
                                      none);
  CHECK_THROWS_AS(train_lead_regressor(ds, ds, data::ScalerParams{}, small_config(1)), DataError);
}

TEST_CASE("training log lists every epoch") {
  const Toy toy = toy_data(6);
  const auto wp = short_windows();
  const auto tr = data::build_dataset(testing::pointers(toy.train), wp, data::FeatureVariant::base);
  const auto sc = data::fit_scaler(tr);
  const auto m = train_fault_classifier(tr, tr, sc, small_config(2), SaveCriteria(1.0));
  std::ostringstream out;
  m.log.write_csv(out);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find("under_threshold") != std::string::npos);
}
