#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "omnitilt/dynamics.hpp"
#include "omnitilt/vehicle_model.hpp"

namespace omnitilt {

struct ImuSample {
  double t = 0.0;
  Vec3 linear_acceleration = Vec3::Zero();   // body frame, kinematic (R^T v_dot)
  Vec3 angular_velocity = Vec3::Zero();
  Vec3 angular_acceleration = Vec3::Zero();
};

/// f = m (a_body + g R^T e3), tau = J omega_dot + omega x J omega.
Wrench wrench_from_inverse_dynamics(const ImuSample& sample, const RigidState& x,
                                    const VehicleParams& params);

/// World-frame linear and body angular acceleration implied by a body wrench.
std::pair<Vec3, Vec3> accelerations_from_wrench(const Vec6& mu, const RigidState& x,
                                                const VehicleParams& params);

/// First-order discrete low-pass, y += a (u - y), a = w dt / (1 + w dt).
class LowPassFilter {
 public:
  explicit LowPassFilter(double cutoff_hz = 20.0);

  Vec6 update(const Vec6& input, double dt);
  void reset(const Vec6& value);
  const Vec6& value() const { return y_; }
  double cutoff() const { return cutoff_; }

 private:
  double cutoff_;
  Vec6 y_ = Vec6::Zero();
};

struct RotorEstimate {
  VecX thrust;  // f_i
  VecX u;       // B^dagger mu
};

RotorEstimate rotor_thrusts_from_wrench(const Wrench& mu, const VehicleModel& model);

struct ImuNoise {
  double accel_std = 0.0;  // [m/s^2]
  double gyro_std = 0.0;   // [rad/s]
};

/// Synthesizes IMU samples from the simulated truth. When `differentiate` is
/// set the angular acceleration is the backward difference of the gyro.
class ImuSimulator {
 public:
  ImuSimulator(ImuNoise noise, std::uint64_t seed, bool differentiate = true);

  ImuSample sample(double t, const RigidState& x, const Vec3& v_dot, const Vec3& omega_dot);

 private:
  ImuNoise noise_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  bool differentiate_;
  std::optional<std::pair<double, Vec3>> previous_gyro_;
};

/// Inverse dynamics followed by the wrench low-pass.
class WrenchEstimator {
 public:
  WrenchEstimator(const VehicleModel& model, double cutoff_hz = 20.0);

  Wrench update(const ImuSample& sample, const RigidState& x, double dt);
  void reset(const Wrench& initial);
  Wrench value() const { return Wrench::from_stacked(filter_.value()); }

 private:
  const VehicleModel* model_;
  LowPassFilter filter_;
};

}  // namespace omnitilt
