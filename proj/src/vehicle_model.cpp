#include "omnitilt/vehicle_model.hpp"

#include <cmath>
#include <numbers>

namespace omnitilt {

VehicleParams VehicleParams::default_quad()
{
  VehicleParams p;
  const double arm_length = 0.23;
  for (int k = 0; k < 4; ++k) {
    const double phi = std::numbers::pi / 4.0 + k * std::numbers::pi / 2.0;
    RotorGeometry r;
    r.tilt_axis = Vec3(std::cos(phi), std::sin(phi), 0.0);
    r.arm = arm_length * r.tilt_axis;
    r.spin = (k % 2 == 0) ? 1 : -1;
    p.rotors.push_back(r);
  }
  return p;
}

void VehicleParams::validate() const
{
  if (rotors.size() < 4) {
    throw std::invalid_argument("vehicle: at least four rotors are required");
  }
  if (!(mass > 0.0) || !(gravity >= 0.0)) {
    throw std::invalid_argument("vehicle: mass must be positive");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (inertia + inertia.transpose()));
  if ((inertia - inertia.transpose()).norm() > 1e-12 || es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("vehicle: inertia must be symmetric positive definite");
  }
  if (!(time_constants.alpha_f > 0.0) || !(time_constants.alpha_theta > 0.0)) {
    throw std::invalid_argument("vehicle: time constants must be positive");
  }
  if (!(f_min > 0.0) || !(f_max > f_min) || !(theta_max > 0.0) || theta_max >= std::numbers::pi) {
    throw std::invalid_argument("vehicle: invalid actuator limits");
  }
  for (const auto& r : rotors) {
    if (std::abs(r.tilt_axis.norm() - 1.0) > 1e-9 || std::abs(r.tilt_axis.z()) > 1e-9) {
      throw std::invalid_argument("vehicle: tilt axes must be unit vectors in the body x-y plane");
    }
    if (r.spin != 1 && r.spin != -1) {
      throw std::invalid_argument("vehicle: spin must be +1 or -1");
    }
  }
}

ActuatorState ActuatorState::uniform(int n, double thrust, double tilt)
{
  return {VecX::Constant(n, thrust), VecX::Constant(n, tilt)};
}

Vec6 Wrench::stacked() const
{
  Vec6 mu;
  mu << force, torque;
  return mu;
}

Wrench Wrench::from_stacked(const Vec6& mu)
{
  return {mu.head<3>(), mu.tail<3>()};
}

VecX ActuatorCommand::interleaved() const
{
  VecX uc(2 * thrust.size());
  for (Eigen::Index i = 0; i < thrust.size(); ++i) {
    uc(2 * i) = thrust(i);
    uc(2 * i + 1) = tilt(i);
  }
  return uc;
}

ActuatorCommand ActuatorCommand::from_interleaved(const VecX& uc)
{
  const Eigen::Index n = uc.size() / 2;
  ActuatorCommand c{VecX(n), VecX(n), false};
  for (Eigen::Index i = 0; i < n; ++i) {
    c.thrust(i) = uc(2 * i);
    c.tilt(i) = uc(2 * i + 1);
  }
  return c;
}

ActuatorCommand ActuatorCommand::hold(const ActuatorState& s)
{
  return {s.thrust, s.tilt, false};
}

SingularAllocationError::SingularAllocationError(int rotor, double thrust)
    : std::runtime_error("rotor " + std::to_string(rotor) + " thrust " + std::to_string(thrust) +
                         " N is below f_min; channel map is singular"),
      rotor_(rotor)
{
}

MatX build_allocation_matrix(const VehicleParams& params)
{
  const int n = params.rotor_count();
  MatX B(6, 2 * n);
  const Vec3 z = e3();
  for (int i = 0; i < n; ++i) {
    const auto& r = params.rotors[i];
    const double s = r.spin * params.drag_coeff;
    const Vec3 t = r.tilt_axis.cross(z);
    B.block<3, 1>(0, 2 * i) = z;
    B.block<3, 1>(3, 2 * i) = r.arm.cross(z) + s * z;
    B.block<3, 1>(0, 2 * i + 1) = t;
    B.block<3, 1>(3, 2 * i + 1) = r.arm.cross(t) + s * t;
  }
  return B;
}

VehicleModel::VehicleModel(VehicleParams params) : params_(std::move(params))
{
  params_.validate();
  B_ = build_allocation_matrix(params_);
  Eigen::FullPivLU<MatX> lu(B_);
  if (lu.rank() < 6) {
    throw std::invalid_argument("vehicle: allocation matrix has rank " + std::to_string(lu.rank()) +
                                " < 6");
  }
  const Mat6 BBt = B_ * B_.transpose();
  B_pinv_ = B_.transpose() * BBt.ldlt().solve(Mat6::Identity());
}

VecX VehicleModel::channel_from_actuators(const ActuatorState& s) const
{
  VecX u(2 * s.size());
  for (int i = 0; i < s.size(); ++i) {
    u(2 * i) = s.thrust(i) * std::cos(s.tilt(i));
    u(2 * i + 1) = s.thrust(i) * std::sin(s.tilt(i));
  }
  return u;
}

void VehicleModel::check_thrust(const VecX& u) const
{
  for (int i = 0; i < rotor_count(); ++i) {
    const double f = std::hypot(u(2 * i), u(2 * i + 1));
    if (f < params_.f_min) {
      throw SingularAllocationError(i, f);
    }
  }
}

ActuatorState VehicleModel::actuators_from_channel_unchecked(const VecX& u) const
{
  const int n = static_cast<int>(u.size() / 2);
  ActuatorState s{VecX(n), VecX(n)};
  for (int i = 0; i < n; ++i) {
    s.thrust(i) = std::hypot(u(2 * i), u(2 * i + 1));
    s.tilt(i) = std::atan2(u(2 * i + 1), u(2 * i));
  }
  return s;
}

ActuatorState VehicleModel::actuators_from_channel(const VecX& u) const
{
  check_thrust(u);
  return actuators_from_channel_unchecked(u);
}

VecX VehicleModel::zeta(const VecX& u, const TimeConstants& tc) const
{
  VecX z(u.size());
  for (int i = 0; i < u.size() / 2; ++i) {
    const double u1 = u(2 * i);
    const double u2 = u(2 * i + 1);
    const double th = std::atan2(u2, u1);
    z(2 * i) = -u1 / tc.alpha_f + u2 * th / tc.alpha_theta;
    z(2 * i + 1) = -u2 / tc.alpha_f - u1 * th / tc.alpha_theta;
  }
  return z;
}

MatX VehicleModel::eta(const VecX& u, const TimeConstants& tc) const
{
  MatX E = MatX::Zero(u.size(), u.size());
  for (int i = 0; i < u.size() / 2; ++i) {
    const double u1 = u(2 * i);
    const double u2 = u(2 * i + 1);
    const double th = std::atan2(u2, u1);
    E(2 * i, 2 * i) = std::cos(th) / tc.alpha_f;
    E(2 * i, 2 * i + 1) = -u2 / tc.alpha_theta;
    E(2 * i + 1, 2 * i) = std::sin(th) / tc.alpha_f;
    E(2 * i + 1, 2 * i + 1) = u1 / tc.alpha_theta;
  }
  return E;
}

MatX VehicleModel::eta_inverse(const VecX& u, const TimeConstants& tc) const
{
  check_thrust(u);
  MatX E = MatX::Zero(u.size(), u.size());
  for (int i = 0; i < u.size() / 2; ++i) {
    const double u1 = u(2 * i);
    const double u2 = u(2 * i + 1);
    const double f = std::hypot(u1, u2);
    const double c = u1 / f;
    const double s = u2 / f;
    const double det = f / (tc.alpha_f * tc.alpha_theta);
    E(2 * i, 2 * i) = u1 / tc.alpha_theta / det;
    E(2 * i, 2 * i + 1) = u2 / tc.alpha_theta / det;
    E(2 * i + 1, 2 * i) = -s / tc.alpha_f / det;
    E(2 * i + 1, 2 * i + 1) = c / tc.alpha_f / det;
  }
  return E;
}

Wrench VehicleModel::wrench_from_actuators(const ActuatorState& s) const
{
  return Wrench::from_stacked(B_ * channel_from_actuators(s));
}

Wrench VehicleModel::wrench_direct_sum(const ActuatorState& s) const
{
  Wrench w;
  for (int i = 0; i < rotor_count(); ++i) {
    const auto& r = params_.rotors[i];
    const Mat3 Ri = exp_so3(r.tilt_axis, s.tilt(i));
    const Vec3 F = s.thrust(i) * Ri * e3();
    w.force += F;
    w.torque += r.arm.cross(F) + r.spin * params_.drag_coeff * F;
  }
  return w;
}

ActuatorCommand VehicleModel::clamp(const VecX& thrust, const VecX& tilt) const
{
  ActuatorCommand c{thrust, tilt, false};
  for (Eigen::Index i = 0; i < thrust.size(); ++i) {
    const double f = std::clamp(thrust(i), params_.f_min, params_.f_max);
    const double th = std::clamp(tilt(i), -params_.theta_max, params_.theta_max);
    if (f != thrust(i) || th != tilt(i) || !std::isfinite(thrust(i)) || !std::isfinite(tilt(i))) {
      c.saturated = true;
    }
    c.thrust(i) = std::isfinite(thrust(i)) ? f : params_.f_min;
    c.tilt(i) = std::isfinite(tilt(i)) ? th : 0.0;
  }
  return c;
}

}  // namespace omnitilt
