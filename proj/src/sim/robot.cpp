#include "fallpred/sim/robot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fallpred/error.hpp"

namespace fallpred::sim {

double RobotParams::nominal_com_height() const {
  return (leg_mass * leg_com + torso_mass * (leg_length + torso_com)) / total_mass();
}

int RobotParams::steps_per_sample() const { return static_cast<int>(std::lround(sample_period / dt)); }

void RobotParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid robot parameter: ") + what);
  };
  require(leg_mass > 0 && torso_mass > 0, "masses must be positive");
  require(leg_length > 0 && torso_length > 0, "link lengths must be positive");
  require(leg_com > 0 && leg_com <= leg_length, "leg CoM must lie on the leg");
  require(torso_com > 0 && torso_com <= torso_length, "torso CoM must lie on the torso");
  require(push_height >= 0 && push_height <= torso_length, "push point must lie on the torso");
  require(foot_half_length > 0, "foot half-length must be positive");
  require(gravity > 0, "gravity must be positive");
  require(ankle_torque_limit > 0 && hip_torque_limit > 0, "torque limits must be positive");
  require(dt > 0 && dt <= sample_period, "dt must be positive and no larger than the sampling period");
  require(std::abs(sample_period / dt - steps_per_sample()) < 1e-9,
          "sampling period must be a whole number of integration steps");
}

namespace {

struct LinkTerms {
  double leg_inertia;    // about the leg CoM
  double torso_inertia;  // about the torso CoM
};

LinkTerms link_terms(const RobotParams& p) {
  return {p.leg_mass * p.leg_length * p.leg_length / 12.0,
          p.torso_mass * p.torso_length * p.torso_length / 12.0};
}

}  // namespace

void update_kinematics(RobotState& s, const RobotParams& p) {
  const double a1 = s.q[0];
  const double a2 = s.q[0] + s.q[1];
  const double w1 = s.qd[0];
  const double w2 = s.qd[0] + s.qd[1];
  const double m = p.total_mass();
  const double s1 = std::sin(a1), c1 = std::cos(a1), s2 = std::sin(a2), c2 = std::cos(a2);

  const double lever1 = p.leg_mass * p.leg_com + p.torso_mass * p.leg_length;
  const double lever2 = p.torso_mass * p.torso_com;
  s.com = {(lever1 * s1 + lever2 * s2) / m, (lever1 * c1 + lever2 * c2) / m};
  s.com_vel = {(lever1 * c1 * w1 + lever2 * c2 * w2) / m, -(lever1 * s1 * w1 + lever2 * s2 * w2) / m};
  s.midtoe = {0.0, 0.0};
}

RobotState upright_state(const RobotParams& params) {
  RobotState s;
  update_kinematics(s, params);
  return s;
}

double pendulum_angle(const RobotState& state) { return std::atan2(state.com.x, state.com.z); }

ControlOutput balance_control(const RobotState& s, const RobotParams& p) {
  const double weight = p.total_mass() * p.gravity;
  const double omega2 = p.gravity / p.nominal_com_height();

  // ZMP that would give the CoM the desired PD closed loop under the
  // linear inverted pendulum approximation, limited to the foot
  const double zmp_wanted = s.com.x + (p.gains.com_kp * s.com.x + p.gains.com_kd * s.com_vel.x) / omega2;
  double zmp = std::clamp(zmp_wanted, -p.foot_half_length, p.foot_half_length);
  double ankle = std::clamp(-weight * zmp, -p.ankle_torque_limit, p.ankle_torque_limit);
  zmp = -ankle / weight;

  const double hip = std::clamp(-p.gains.hip_kp * s.q[1] - p.gains.hip_kd * s.qd[1], -p.hip_torque_limit,
                                p.hip_torque_limit);
  return {{ankle, hip}, zmp};
}

std::array<double, 2> joint_accelerations(const std::array<double, 2>& q, const std::array<double, 2>& qd,
                                          const std::array<double, 2>& tau, double external_force,
                                          const RobotParams& p) {
  // Equations of motion in absolute link angles a1 = q0, a2 = q0 + q1.
  const auto [leg_i, torso_i] = link_terms(p);
  const double a1 = q[0];
  const double a2 = q[0] + q[1];
  const double w1 = qd[0];
  const double w2 = qd[0] + qd[1];
  const double d = a1 - a2;
  const double coupling = p.torso_mass * p.leg_length * p.torso_com;

  const double m11 = leg_i + p.leg_mass * p.leg_com * p.leg_com + p.torso_mass * p.leg_length * p.leg_length;
  const double m12 = coupling * std::cos(d);
  const double m22 = torso_i + p.torso_mass * p.torso_com * p.torso_com;

  const double g1 = (p.leg_mass * p.leg_com + p.torso_mass * p.leg_length) * p.gravity * std::sin(a1);
  const double g2 = p.torso_mass * p.torso_com * p.gravity * std::sin(a2);

  const double f1 = tau[0] - tau[1] + external_force * p.leg_length * std::cos(a1) + g1 -
                    coupling * std::sin(d) * w2 * w2;
  const double f2 = tau[1] + external_force * p.push_height * std::cos(a2) + g2 + coupling * std::sin(d) * w1 * w1;

  const double det = m11 * m22 - m12 * m12;
  const double acc1 = (m22 * f1 - m12 * f2) / det;
  const double acc2 = (m11 * f2 - m12 * f1) / det;
  return {acc1, acc2 - acc1};
}

RobotState step(const RobotState& state, double external_force, const RobotParams& params, double fall_height) {
  if (state.fallen) throw std::invalid_argument("step: robot has already fallen");

  const ControlOutput ctrl = balance_control(state, params);
  const auto acc = joint_accelerations(state.q, state.qd, ctrl.tau, external_force, params);

  RobotState next = state;
  next.t = state.t + params.dt;
  for (int j = 0; j < 2; ++j) {
    next.qd[j] = state.qd[j] + params.dt * acc[j];
    next.q[j] = state.q[j] + params.dt * next.qd[j];
  }
  next.tau = ctrl.tau;
  next.contact = ctrl.contact;
  update_kinematics(next, params);

  const bool finite = std::isfinite(next.q[0]) && std::isfinite(next.q[1]) && std::isfinite(next.qd[0]) &&
                      std::isfinite(next.qd[1]);
  if (!finite) throw SimulationDiverged("simulation diverged at t = " + std::to_string(next.t));

  next.fallen = next.com.z < fall_height || std::abs(pendulum_angle(next)) > std::numbers::pi / 2;
  return next;
}

}  // namespace fallpred::sim
