#pragma once

#include <cstdint>
#include <vector>

#include "fallpred/data/dataset.hpp"
#include "fallpred/rng.hpp"
#include "fallpred/sim/episode.hpp"

namespace fallpred::testing {

/// Trajectory with hand-made samples: n samples starting at `start`, state
/// values drawn from `rng`, optional fault and fall times.
inline sim::Trajectory synthetic_trajectory(std::uint64_t id, std::size_t n, Micros start,
                                            std::optional<Micros> fault, std::optional<Micros> fall, Rng& rng,
                                            forces::FaultKind kind = forces::FaultKind::abrupt) {
  sim::Trajectory t;
  t.id = id;
  t.profile.kind = kind;
  t.start_time = start;
  t.fault_time = fault;
  t.fall_time = fall;
  for (std::size_t i = 0; i < n; ++i) {
    sim::RobotState s;
    s.t = to_seconds(t.time_at(i));
    s.q = {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    s.qd = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    s.tau = {rng.uniform(-100, 100), rng.uniform(-100, 100)};
    s.com = {rng.uniform(-0.1, 0.1), rng.uniform(0.8, 1.0)};
    s.com_vel = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    s.contact = rng.uniform(-0.1, 0.1);
    t.samples.push_back(s);
  }
  return t;
}

/// Trajectory whose base features are all `level` before `change_index` and
/// `level + jump` from then on.
inline sim::Trajectory step_trajectory(std::uint64_t id, std::size_t n, std::size_t change_index, double jump,
                                       std::optional<Micros> fault, std::optional<Micros> fall) {
  sim::Trajectory t;
  t.id = id;
  t.profile.kind = forces::FaultKind::abrupt;
  t.start_time = Micros{1'000'000};
  t.fault_time = fault;
  t.fall_time = fall;
  for (std::size_t i = 0; i < n; ++i) {
    sim::RobotState s;
    s.t = to_seconds(t.time_at(i));
    const double v = i >= change_index ? jump : 0.0;
    s.q = {v, v};
    s.qd = {v, v};
    s.com = {v, 0.9 + v};
    s.com_vel = {v, v};
    t.samples.push_back(s);
  }
  return t;
}

inline std::vector<const sim::Trajectory*> pointers(const std::vector<sim::Trajectory>& ts) {
  std::vector<const sim::Trajectory*> out;
  for (const auto& t : ts) out.push_back(&t);
  return out;
}

}  // namespace fallpred::testing
