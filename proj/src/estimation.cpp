#include "omnitilt/estimation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace omnitilt {

Wrench wrench_from_inverse_dynamics(const ImuSample& sample, const RigidState& x,
                                    const VehicleParams& params)
{
  const Mat3& J = params.inertia;
  const Vec3& w = sample.angular_velocity;
  Wrench out;
  out.force = params.mass *
              (sample.linear_acceleration + params.gravity * x.R.transpose() * e3());
  out.torque = J * sample.angular_acceleration + w.cross(J * w);
  return out;
}

std::pair<Vec3, Vec3> accelerations_from_wrench(const Vec6& mu, const RigidState& x,
                                                const VehicleParams& params)
{
  const Mat3& J = params.inertia;
  const Vec3 v_dot = x.R * mu.head<3>() / params.mass - params.gravity * e3();
  const Vec3 w_dot = J.ldlt().solve(Vec3(mu.tail<3>() - x.omega.cross(J * x.omega)));
  return {v_dot, w_dot};
}

LowPassFilter::LowPassFilter(double cutoff_hz) : cutoff_(cutoff_hz)
{
  if (!(cutoff_hz > 0.0)) {
    throw std::invalid_argument("low-pass cutoff must be positive");
  }
}

Vec6 LowPassFilter::update(const Vec6& input, double dt)
{
  if (!(dt > 0.0)) {
    throw std::invalid_argument("low-pass dt must be positive");
  }
  const double wdt = 2.0 * std::numbers::pi * cutoff_ * dt;
  y_ += wdt / (1.0 + wdt) * (input - y_);
  return y_;
}

void LowPassFilter::reset(const Vec6& value)
{
  y_ = value;
}

RotorEstimate rotor_thrusts_from_wrench(const Wrench& mu, const VehicleModel& model)
{
  RotorEstimate r;
  r.u = model.allocation_pinv() * mu.stacked();
  const int n = model.rotor_count();
  r.thrust.resize(n);
  for (int i = 0; i < n; ++i) {
    r.thrust(i) = std::hypot(r.u(2 * i), r.u(2 * i + 1));
  }
  return r;
}

ImuSimulator::ImuSimulator(ImuNoise noise, std::uint64_t seed, bool differentiate)
    : noise_(noise), rng_(seed), differentiate_(differentiate)
{
}

ImuSample ImuSimulator::sample(double t, const RigidState& x, const Vec3& v_dot,
                               const Vec3& omega_dot)
{
  const auto noise = [&](double std) {
    if (std <= 0.0) {
      return Vec3::Zero().eval();
    }
    return Vec3(std * normal_(rng_), std * normal_(rng_), std * normal_(rng_));
  };
  ImuSample s;
  s.t = t;
  s.linear_acceleration = x.R.transpose() * v_dot + noise(noise_.accel_std);
  s.angular_velocity = x.omega + noise(noise_.gyro_std);
  if (differentiate_) {
    if (previous_gyro_ && t > previous_gyro_->first) {
      s.angular_acceleration =
          (s.angular_velocity - previous_gyro_->second) / (t - previous_gyro_->first);
    } else {
      s.angular_acceleration = omega_dot;
    }
  } else {
    s.angular_acceleration = omega_dot;
  }
  previous_gyro_ = std::make_pair(t, s.angular_velocity);
  return s;
}

WrenchEstimator::WrenchEstimator(const VehicleModel& model, double cutoff_hz)
    : model_(&model), filter_(cutoff_hz)
{
}

Wrench WrenchEstimator::update(const ImuSample& sample, const RigidState& x, double dt)
{
  const Wrench raw = wrench_from_inverse_dynamics(sample, x, model_->params());
  return Wrench::from_stacked(filter_.update(raw.stacked(), dt));
}

void WrenchEstimator::reset(const Wrench& initial)
{
  filter_.reset(initial.stacked());
}

}  // namespace omnitilt
