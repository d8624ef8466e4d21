#include "omnitilt/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace omnitilt {

namespace {

Vec3 sat_slope(const Vec3& y, double sigma)
{
  Vec3 d;
  for (int i = 0; i < 3; ++i) {
    d(i) = std::abs(y(i)) < sigma ? 1.0 : 0.0;
  }
  return d;
}

}  // namespace

void Gains::validate() const
{
  for (double k : {k_tp, k_td, k_ti, k_rp, k_rd, k_ri, c1, c2, sigma1, sigma2, k_mu}) {
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw std::invalid_argument("gains must be positive and finite");
    }
  }
}

ErrorState compute_errors(const RigidState& x, const Reference& ref)
{
  ErrorState e;
  e.e_p = x.p - ref.p_d;
  e.e_v = x.v - ref.v_d;
  e.e_R = rotation_error(x.R, ref.R_d);
  e.e_omega = x.omega - x.R.transpose() * ref.R_d * ref.omega_d;
  return e;
}

Vec3 position_integrand(const ErrorState& e, const Gains& g)
{
  return e.e_v + g.c1 * e.e_p;
}

Vec3 attitude_integrand(const ErrorState& e, const Gains& g)
{
  return e.e_omega + g.c2 * e.e_R;
}

ErrorState update_integrals(const ErrorState& previous, const ErrorState& current, const Gains& g,
                            double dt)
{
  ErrorState out = current;
  out.e_pi = previous.e_pi +
             0.5 * dt * (position_integrand(previous, g) + position_integrand(current, g));
  out.e_ri = previous.e_ri +
             0.5 * dt * (attitude_integrand(previous, g) + attitude_integrand(current, g));
  return out;
}

Vec6 nominal_wrench(const ErrorState& e, const RigidState& x, const Reference& ref, const Gains& g,
                    const VehicleParams& params)
{
  const Mat3& J = params.inertia;
  const Mat3 Q = x.R.transpose() * ref.R_d;
  const Vec3 a_cmd = -g.k_tp * e.e_p - g.k_td * e.e_v - g.k_ti * sat(e.e_pi, g.sigma1) +
                     params.gravity * e3() + ref.a_d;
  Vec6 mu;
  mu.head<3>() = params.mass * x.R.transpose() * a_cmd;
  mu.tail<3>() = x.omega.cross(J * x.omega) -
                 J * (x.omega.cross(Q * ref.omega_d) - Q * ref.omega_d_dot) - g.k_rp * e.e_R -
                 g.k_rd * e.e_omega - g.k_ri * sat(e.e_ri, g.sigma2);
  return mu;
}

Vec6 kappa(const ErrorState& e, const RigidState& x, const Gains& g, const VehicleParams& params)
{
  Vec6 k;
  k.head<3>() = x.R.transpose() * (g.c1 * e.e_p + e.e_v) / params.mass;
  k.tail<3>() = g.c2 * params.inertia.ldlt().solve(e.e_R) + e.e_omega;
  return k;
}

Vec6 mu_d_dot_analytic(const ErrorState& e, const RigidState& x, const Reference& ref,
                       const Gains& g, const VehicleParams& params, const Vec3& v_dot,
                       const Vec3& omega_dot)
{
  const Mat3& J = params.inertia;
  const Vec3& w = x.omega;
  const Mat3 Rt = x.R.transpose();
  const Mat3 Q = Rt * ref.R_d;
  const Vec3 wdd = ref.omega_d_ddot.value_or(Vec3::Zero());

  const Vec3 a_cmd = -g.k_tp * e.e_p - g.k_td * e.e_v - g.k_ti * sat(e.e_pi, g.sigma1) +
                     params.gravity * e3() + ref.a_d;
  const Vec3 ev_dot = v_dot - ref.a_d;
  const Vec3 a_cmd_dot = -g.k_tp * e.e_v - g.k_td * ev_dot -
                         g.k_ti * sat_slope(e.e_pi, g.sigma1).cwiseProduct(position_integrand(e, g)) +
                         ref.j_d;

  const Vec3 Qwd = Q * ref.omega_d;
  const Vec3 Qwd_dot = Q * ref.omega_d_dot;
  const Vec3 ff_dot = omega_dot.cross(Qwd) - w.cross(w.cross(Qwd)) + 2.0 * w.cross(Qwd_dot) -
                      Q * ref.omega_d.cross(ref.omega_d_dot) - Q * wdd;
  const Vec3 eR_dot = 0.5 * (Q.trace() * Mat3::Identity() - Q) * e.e_omega;
  const Vec3 ew_dot = omega_dot + w.cross(Qwd) - Qwd_dot;

  Vec6 d;
  d.head<3>() = params.mass * (-w.cross(Rt * a_cmd) + Rt * a_cmd_dot);
  d.tail<3>() = omega_dot.cross(J * w) + w.cross(J * omega_dot) - J * ff_dot - g.k_rp * eR_dot -
                g.k_rd * ew_dot -
                g.k_ri * sat_slope(e.e_ri, g.sigma2).cwiseProduct(attitude_integrand(e, g));
  return d;
}

Vec6 NumericMuDot::update(const Vec6& mu_d, double dt)
{
  if (!primed_) {
    primed_ = true;
    previous_ = mu_d;
    output_.setZero();
    return output_;
  }
  const Vec6 raw = (mu_d - previous_) / dt;
  previous_ = mu_d;
  output_ += dt / (tau_ + dt) * (raw - output_);
  return output_;
}

ActuatorCommand backstepping_command(const VehicleModel& model, const TimeConstants& nominal,
                                     const VecX& u, const Vec6& mu_d_dot, const Vec6& e_mu,
                                     const Vec6& kappa_v, double k_mu, VecX* raw)
{
  const MatX& B = model.allocation();
  const Vec6 target = mu_d_dot - B * model.zeta(u, nominal) - k_mu * e_mu - kappa_v;
  const VecX uc = model.eta_inverse(u, nominal) * (model.allocation_pinv() * target);
  if (raw != nullptr) {
    *raw = uc;
  }
  const ActuatorCommand split = ActuatorCommand::from_interleaved(uc);
  return model.clamp(split.thrust, split.tilt);
}

ActuatorCommand baseline_command(const VehicleModel& model, const Vec6& mu_d)
{
  const ActuatorState s = model.actuators_from_channel_unchecked(model.allocation_pinv() * mu_d);
  return model.clamp(s.thrust, s.tilt);
}

BacksteppingController::BacksteppingController(const VehicleModel& model, Gains gains,
                                               TimeConstants nominal, MuDotMode mode,
                                               double numeric_smoothing)
    : model_(&model), gains_(gains), nominal_(nominal), mode_(mode), numeric_(numeric_smoothing)
{
  gains_.validate();
}

void BacksteppingController::reset(const Vec3& e_pi0, const Vec3& e_ri0)
{
  previous_.reset();
  numeric_.reset();
  e_pi0_ = e_pi0;
  e_ri0_ = e_ri0;
}

ControllerOutput BacksteppingController::update(const ControllerInput& in, double dt)
{
  const VehicleParams& prm = model_->params();
  ErrorState e = compute_errors(in.x, in.ref);
  if (previous_) {
    e = update_integrals(*previous_, e, gains_, dt);
  } else {
    e.e_pi = e_pi0_;
    e.e_ri = e_ri0_;
  }
  previous_ = e;

  ControllerOutput out;
  out.mu_d = nominal_wrench(e, in.x, in.ref, gains_, prm);
  e.e_mu = in.mu - out.mu_d;
  out.kappa = kappa(e, in.x, gains_, prm);
  if (mode_ == MuDotMode::analytic) {
    out.mu_d_dot = mu_d_dot_analytic(e, in.x, in.ref, gains_, prm, in.v_dot, in.omega_dot);
  } else {
    out.mu_d_dot = numeric_.update(out.mu_d, dt);
  }

  // keep eta invertible when the thrust estimate drops below f_min
  VecX u = in.u;
  for (int i = 0; i < model_->rotor_count(); ++i) {
    const double f = std::hypot(u(2 * i), u(2 * i + 1));
    if (f < prm.f_min) {
      const double th = f > 0.0 ? std::atan2(u(2 * i + 1), u(2 * i)) : 0.0;
      u(2 * i) = prm.f_min * std::cos(th);
      u(2 * i + 1) = prm.f_min * std::sin(th);
    }
  }
  out.cmd = backstepping_command(*model_, nominal_, u, out.mu_d_dot, e.e_mu, out.kappa,
                                 gains_.k_mu);
  out.errors = e;
  return out;
}

BaselineController::BaselineController(const VehicleModel& model, Gains gains)
    : model_(&model), gains_(gains)
{
  gains_.validate();
}

void BaselineController::reset(const Vec3& e_pi0, const Vec3& e_ri0)
{
  previous_.reset();
  e_pi0_ = e_pi0;
  e_ri0_ = e_ri0;
}

ControllerOutput BaselineController::update(const ControllerInput& in, double dt)
{
  const VehicleParams& prm = model_->params();
  ErrorState e = compute_errors(in.x, in.ref);
  if (previous_) {
    e = update_integrals(*previous_, e, gains_, dt);
  } else {
    e.e_pi = e_pi0_;
    e.e_ri = e_ri0_;
  }
  previous_ = e;

  ControllerOutput out;
  out.mu_d = nominal_wrench(e, in.x, in.ref, gains_, prm);
  e.e_mu = in.mu - out.mu_d;
  out.kappa = kappa(e, in.x, gains_, prm);
  out.cmd = baseline_command(*model_, out.mu_d);
  out.errors = e;
  return out;
}

std::unique_ptr<Controller> make_controller(const std::string& name, const VehicleModel& model,
                                            const Gains& gains, const TimeConstants& nominal,
                                            MuDotMode mode)
{
  if (name == "proposed") {
    return std::make_unique<BacksteppingController>(model, gains, nominal, mode);
  }
  if (name == "baseline") {
    return std::make_unique<BaselineController>(model, gains);
  }
  throw std::invalid_argument("unknown controller '" + name + "' (expected proposed|baseline)");
}

}  // namespace omnitilt
