#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "omnitilt/geometry.hpp"

namespace omnitilt {

struct RotorGeometry {
  Vec3 arm = Vec3::Zero();         // displacement from the geometric center [m]
  Vec3 tilt_axis = Vec3::UnitX();  // unit servo axis, lies along the arm
  int spin = 1;                    // +1 / -1 drag-torque handedness
};

/// First-order lag constants of the rotor thrust and servo angle channels [s].
struct TimeConstants {
  double alpha_f = 0.05;
  double alpha_theta = 0.1;
};

struct VehicleParams {
  double mass = 2.0;
  double gravity = 9.81;
  Mat3 inertia = Vec3(0.03, 0.03, 0.05).asDiagonal();
  std::vector<RotorGeometry> rotors;
  double drag_coeff = 0.016;  // k_f [m]
  TimeConstants time_constants;
  double f_min = 0.1;      // [N]
  double f_max = 15.0;     // hardware thrust limit [N]
  double theta_max = 2.0;  // servo angle limit [rad]

  /// Four arms at 45 deg + k * 90 deg in the body x-y plane, 0.23 m long,
  /// tilt axes along the arms and alternating spin.
  static VehicleParams default_quad();

  int rotor_count() const { return static_cast<int>(rotors.size()); }

  /// Throws std::invalid_argument on violated invariants.
  void validate() const;
};

struct ActuatorState {
  VecX thrust;  // f_i [N]
  VecX tilt;    // theta_i [rad]

  static ActuatorState uniform(int n, double thrust, double tilt = 0.0);
  int size() const { return static_cast<int>(thrust.size()); }
};

struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();

  Vec6 stacked() const;
  static Wrench from_stacked(const Vec6& mu);
};

/// Actuator-level command u_c, stored per channel.
struct ActuatorCommand {
  VecX thrust;  // f_c,i
  VecX tilt;    // theta_c,i
  bool saturated = false;

  /// (f_c1, theta_c1, f_c2, theta_c2, ...)
  VecX interleaved() const;
  static ActuatorCommand from_interleaved(const VecX& uc);
  static ActuatorCommand hold(const ActuatorState& s);
};

/// Raised when a rotor thrust is below f_min where the channel map is singular.
class SingularAllocationError : public std::runtime_error {
 public:
  SingularAllocationError(int rotor, double thrust);
  int rotor() const { return rotor_; }

 private:
  int rotor_;
};

/// 6 x 2n matrix mapping the channel vector u to the body wrench.
MatX build_allocation_matrix(const VehicleParams& params);

/// Rotor/servo geometry plus the channel-space actuator maps. Immutable.
class VehicleModel {
 public:
  explicit VehicleModel(VehicleParams params);

  const VehicleParams& params() const { return params_; }
  int rotor_count() const { return params_.rotor_count(); }
  const MatX& allocation() const { return B_; }
  const MatX& allocation_pinv() const { return B_pinv_; }

  /// u = (f_i cos theta_i, f_i sin theta_i) per rotor.
  VecX channel_from_actuators(const ActuatorState& s) const;

  /// Inverse channel map via atan2. Throws SingularAllocationError if any
  /// f_i < f_min.
  ActuatorState actuators_from_channel(const VecX& u) const;

  /// Same as actuators_from_channel without the f_min check.
  ActuatorState actuators_from_channel_unchecked(const VecX& u) const;

  /// Drift term of u_dot = zeta(u) + eta(u) u_c.
  VecX zeta(const VecX& u, const TimeConstants& tc) const;

  /// Block-diagonal input matrix of u_dot = zeta(u) + eta(u) u_c.
  MatX eta(const VecX& u, const TimeConstants& tc) const;

  /// Closed-form blockwise inverse of eta.
  MatX eta_inverse(const VecX& u, const TimeConstants& tc) const;

  /// B * u
  Wrench wrench_from_actuators(const ActuatorState& s) const;

  /// Direct per-rotor summation of force and torque with R_i = exp(theta_i a_i^).
  Wrench wrench_direct_sum(const ActuatorState& s) const;

  /// Clamp a raw command to [f_min, f_max] x [-theta_max, theta_max].
  ActuatorCommand clamp(const VecX& thrust, const VecX& tilt) const;

 private:
  void check_thrust(const VecX& u) const;

  VehicleParams params_;
  MatX B_;
  MatX B_pinv_;
};

}  // namespace omnitilt
