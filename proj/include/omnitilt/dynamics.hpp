#pragma once

#include <cstdint>
#include <optional>

#include "omnitilt/geometry.hpp"
#include "omnitilt/vehicle_model.hpp"

namespace omnitilt {

struct RigidState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 omega = Vec3::Zero();  // body frame

  bool finite() const;
};

/// Payload resting on a table, tied to the vehicle by an elastic string.
struct TetherConfig {
  double mass = 0.21;           // [kg]
  double length = 0.6;          // [m]
  Vec3 attach = Vec3(0.0, 0.1, -0.05);  // body-frame attach point [m]
  double stiffness = 400.0;     // [N/m]
  double damping = 5.0;         // [N s/m]
  double table_height = 0.9;    // [m]
  double table_edge_x = 0.5;    // [m]
  Vec3 payload_start = Vec3(0.5, 0.1, 0.9);
};

struct DisturbanceProfile {
  Vec3 delta_p = Vec3::Zero();  // [m/s^2]
  Vec3 delta_r = Vec3::Zero();  // [rad/s^2]
  std::optional<TetherConfig> tether;
};

struct TetherState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  bool released = false;
};

struct SimConfig {
  double dt_physics = 1e-3;
  double dt_ctrl_pos = 1e-2;
  double dt_ctrl_att = 5e-3;
  double duration = 10.0;
  TimeConstants plant_time_constants;  // true plant lag, may differ from the controller's
  std::uint64_t seed = 1;

  void validate() const;
};

struct RigidRates {
  Vec3 p_dot;
  Vec3 v_dot;
  Vec3 omega_dot;
};

/// Rigid-body rates. `external` is an additional body-frame wrench (tether).
RigidRates rigid_derivative(const RigidState& x, const Wrench& rotor_wrench,
                            const VehicleParams& params, const DisturbanceProfile& d,
                            const Wrench& external = {});

/// Convenience overload evaluating the rotor wrench from the actuator state.
RigidRates rigid_derivative(const RigidState& x, const ActuatorState& s, const VehicleModel& model,
                            const DisturbanceProfile& d);

struct ActuatorRates {
  VecX thrust_dot;
  VecX tilt_dot;
};

ActuatorRates actuator_derivative(const ActuatorState& s, const ActuatorCommand& cmd,
                                  const TimeConstants& tc);

struct TetherForce {
  Wrench body;         // wrench on the vehicle, body frame
  Vec3 world_force;    // force on the vehicle, world frame
  double tension = 0.0;
};

/// String force on the vehicle for the given payload state. Zero while slack.
TetherForce tether_wrench(const RigidState& x, const TetherState& ts, const TetherConfig& cfg);

struct PlantState {
  double t = 0.0;
  RigidState rigid;
  ActuatorState actuators;
  TetherState tether;
};

/// Instantaneous accelerations and wrenches of the plant.
struct PlantOutputs {
  Vec3 v_dot = Vec3::Zero();
  Vec3 omega_dot = Vec3::Zero();
  Wrench rotor_wrench;
  TetherForce tether;
};

/// Ground-truth plant: rigid body, actuator lag and optional tether payload,
/// integrated with classical RK4. Rotation stages use the exponential map.
class Plant {
 public:
  Plant(const VehicleModel& model, DisturbanceProfile disturbance, TimeConstants plant_tc);

  void reset(const PlantState& state);
  const PlantState& state() const { return state_; }
  const DisturbanceProfile& disturbance() const { return disturbance_; }
  const TimeConstants& time_constants() const { return tc_; }

  /// Advance by dt (which may be negative) holding `cmd`. Returns false and
  /// sets diverged() when the state becomes non-finite.
  bool step(const ActuatorCommand& cmd, double dt);

  PlantOutputs outputs() const;
  bool diverged() const { return diverged_; }

  const VehicleModel& model() const { return *model_; }

 private:
  void update_tether_contact();

  const VehicleModel* model_;
  DisturbanceProfile disturbance_;
  TimeConstants tc_;
  PlantState state_;
  bool diverged_ = false;
};

/// Plant at rest at (p, R) with the minimum-norm actuator state that
/// cancels gravity.
PlantState hover_state(const VehicleModel& model, const Vec3& p, const Mat3& R = Mat3::Identity());

}  // namespace omnitilt
