#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fallpred/forces/force_profile.hpp"
#include "fallpred/rng.hpp"

using namespace fallpred;
using namespace fallpred::forces;

namespace {

double integrate(const ForceProfile& p, double t0, double t1, int n) {
  // midpoint rule; exact for piecewise-linear integrands away from kinks
  const double h = (t1 - t0) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += fault_force_at(p, t0 + (i + 0.5) * h);
  return s * h;
}

// Kolmogorov-Smirnov statistic of samples against U(lo, hi).
double ks_uniform(std::vector<double> x, double lo, double hi) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = (x[i] - lo) / (hi - lo);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

ForceProfile single(FaultKind kind, double start, double amplitude) {
  ForceProfile p;
  p.kind = kind;
  p.first_kind = kind;
  p.fault_start = start;
  p.amplitude = amplitude;
  return p;
}

}  // namespace

TEST_CASE("impulse is half-open with 75 ms support") {
  CHECK(impulse_force(1.0, 50.0, 0.075, 1.0) == 50.0);
  CHECK(impulse_force(1.0, 50.0, 0.075, 1.0749999) == 50.0);
  CHECK(impulse_force(1.0, 50.0, 0.075, 1.075) == 0.0);
  CHECK(impulse_force(1.0, 50.0, 0.075, 0.9999999) == 0.0);
  const auto p = single(FaultKind::abrupt, 2.0, 120.0);
  CHECK(fault_impulse(p) == doctest::Approx(120.0 * 0.075).epsilon(1e-12));
}

TEST_CASE("trapezoid reaches its amplitude at A/s and is symmetric") {
  const double a = 57.6, s = 480.0, hold = 1.0, t0 = 3.0;
  CHECK(std::abs(trapezoid_force(t0, a, s, hold, t0 + a / s) - a) < 1e-9);
  CHECK(std::abs(trapezoid_force(t0, a, s, hold, t0 + 0.06) - a / 2) < 1e-9);
  CHECK(std::abs(trapezoid_force(t0, a, s, hold, t0 + a / s + hold) - a) < 1e-9);
  const double end = t0 + 2 * a / s + hold;
  for (double u : {0.01, 0.05, 0.1}) {
    CHECK(std::abs(trapezoid_force(t0, a, s, hold, t0 + u) - trapezoid_force(t0, a, s, hold, end - u)) < 1e-9);
  }
  CHECK(trapezoid_force(t0, a, s, hold, end + 1e-6) == 0.0);
  const auto p = single(FaultKind::incipient, t0, a);
  CHECK(fault_impulse(p) == doctest::Approx(a * (hold + a / s)).epsilon(1e-12));
  CHECK(integrate(p, t0, end, 200000) == doctest::Approx(fault_impulse(p)).epsilon(1e-6));
}

TEST_CASE("intermittent force is the sum of its parts") {
  ForceProfile p;
  p.kind = FaultKind::intermittent;
  p.perturbation_amplitude = 30.0;
  p.first_kind = FaultKind::incipient;
  p.fault_start = 2.2;
  p.amplitude = 20.0;
  p.gap = 1.4;
  p.second_kind = FaultKind::abrupt;
  p.second_amplitude = 150.0;
  p.validate();
  const auto [first, second] = split_intermittent(p);
  CHECK(first.kind == FaultKind::incipient);
  CHECK(second.kind == FaultKind::abrupt);
  CHECK(second.fault_start == doctest::Approx(3.6));
  for (double t = 0.0; t < 6.0; t += 0.0005) {
    const double prelude = impulse_force(p.perturbation_start, p.perturbation_amplitude, p.perturbation_duration, t);
    CHECK(std::abs(force_at(p, t) - (prelude + force_at(first, t) + force_at(second, t))) < 1e-9);
  }
}

TEST_CASE("fault kinds round-trip through text") {
  for (FaultKind k : {FaultKind::prelude_only, FaultKind::abrupt, FaultKind::incipient, FaultKind::intermittent})
    CHECK(parse_fault_kind(to_string(k)) == k);
  CHECK_THROWS(parse_fault_kind("sideways"));
}

TEST_CASE("profile validation rejects bad schedules") {
  auto p = single(FaultKind::abrupt, 2.0, -1.0);
  CHECK_THROWS(p.validate());
  p.amplitude = 10.0;
  p.slope = 0.0;
  CHECK_THROWS(p.validate());
}

TEST_CASE("sampled amplitudes are uniform over the calibrated range") {
  ForceRanges r;
  r.abrupt_boundary = 100.0;
  r.abrupt_bound = 200.0;
  r.incipient_boundary = 20.0;
  r.incipient_bound = 40.0;
  r.prelude_bound = 90.0;
  Rng rng(42);
  std::vector<double> abrupt, prelude;
  for (int i = 0; i < 2000; ++i) {
    const auto p = sample_profile(FaultKind::abrupt, rng, r);
    CHECK(p.amplitude >= 0.0);
    CHECK(p.amplitude <= 200.0);
    abrupt.push_back(p.amplitude);
    prelude.push_back(p.perturbation_amplitude);
    // onset on the 10 ms grid within [2.0, 2.5]
    const double k = p.fault_start / 0.01;
    CHECK(std::abs(k - std::round(k)) < 1e-9);
    CHECK(p.fault_start >= 2.0 - 1e-12);
    CHECK(p.fault_start <= 2.5 + 1e-12);
  }
  // 1% critical value for n = 2000 is about 1.63 / sqrt(n)
  CHECK(ks_uniform(abrupt, 0.0, 200.0) < 1.63 / std::sqrt(2000.0));
  CHECK(ks_uniform(prelude, 0.0, 90.0) < 1.63 / std::sqrt(2000.0));
}

TEST_CASE("intermittent profiles put the first fault below the boundary") {
  ForceRanges r;
  r.abrupt_boundary = 100.0;
  r.abrupt_bound = 200.0;
  r.incipient_boundary = 20.0;
  r.incipient_bound = 40.0;
  r.prelude_bound = 90.0;
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto p = sample_profile(FaultKind::intermittent, rng, r);
    CHECK(p.amplitude < r.boundary(p.first_kind));
    CHECK(p.second_amplitude <= r.bound(p.second_kind));
    CHECK(p.gap >= 1.0 - 1e-12);
    CHECK(p.gap <= 2.5 + 1e-12);
  }
}
