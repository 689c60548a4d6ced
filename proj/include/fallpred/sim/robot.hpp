#pragma once

#include <array>

namespace fallpred::sim {

struct Vec2 {
  double x = 0.0;
  double z = 0.0;
};

struct ControllerGains {
  double com_kp = 16.0;  // 1/s^2, closed-loop CoM stiffness
  double com_kd = 5.6;   // 1/s
  double hip_kp = 400.0; // N*m/rad
  double hip_kd = 60.0;  // N*m*s/rad
};

/// Planar standing robot: a leg link pivoting at the ankle on a flat foot and
/// a torso link on top of it, joined at the hip. Angles are pitch angles
/// measured from vertical, positive leaning towards +x.
struct RobotParams {
  double leg_mass = 30.0;
  double leg_length = 0.9;
  double leg_com = 0.63;  // ankle to leg CoM
  double torso_mass = 18.0;
  double torso_length = 0.9;
  double torso_com = 0.45;  // hip to torso CoM
  double push_height = 0.35;  // hip to torso point where external forces act
  double foot_half_length = 0.1;
  double gravity = 9.81;
  double ankle_torque_limit = 150.0;
  double hip_torque_limit = 150.0;
  ControllerGains gains{};
  double dt = 0.001;
  double sample_period = 0.01;

  double total_mass() const { return leg_mass + torso_mass; }
  double nominal_com_height() const;
  /// Sampling period as a whole number of integration steps.
  int steps_per_sample() const;
  /// Throws ConfigError when a parameter is out of range.
  void validate() const;
};

struct RobotState {
  double t = 0.0;
  std::array<double, 2> q{};    // ankle, hip
  std::array<double, 2> qd{};
  std::array<double, 2> tau{};  // torques applied during the step that produced this state
  Vec2 com{};
  Vec2 com_vel{};
  Vec2 midtoe{};
  double contact = 0.0;  // x of ZMP, or of the foot edge when the foot is tipping
  bool fallen = false;
};

/// Recomputes com, com_vel and midtoe from the joint state.
void update_kinematics(RobotState& state, const RobotParams& params);

/// Upright, at rest, zero torques.
RobotState upright_state(const RobotParams& params);

/// Lean angle of the CoM as seen from the ankle.
double pendulum_angle(const RobotState& state);

struct ControlOutput {
  std::array<double, 2> tau{};
  double contact = 0.0;
};

/// Balance controller: PD on CoM position through the ankle, with the ankle
/// torque clamped so the ZMP stays on the foot, and PD on the hip keeping the
/// torso aligned with the leg. Both torques are clipped to actuator limits.
ControlOutput balance_control(const RobotState& state, const RobotParams& params);

/// Joint accelerations for the given torques and horizontal torso force.
std::array<double, 2> joint_accelerations(const std::array<double, 2>& q, const std::array<double, 2>& qd,
                                          const std::array<double, 2>& tau, double external_force,
                                          const RobotParams& params);

/// One semi-implicit Euler step of length params.dt under the balance
/// controller. Sets `fallen` when the CoM drops below `fall_height` or leans
/// past horizontal. Throws SimulationDiverged on non-finite values and
/// std::invalid_argument if `state` has already fallen.
RobotState step(const RobotState& state, double external_force, const RobotParams& params,
                double fall_height = 0.12);

}  // namespace fallpred::sim
