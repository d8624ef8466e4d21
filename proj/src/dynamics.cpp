#include "omnitilt/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace omnitilt {

bool RigidState::finite() const
{
  return p.allFinite() && v.allFinite() && R.allFinite() && omega.allFinite();
}

void SimConfig::validate() const
{
  if (!(dt_physics > 0.0) || dt_ctrl_att < dt_physics || dt_ctrl_pos < dt_ctrl_att) {
    throw std::invalid_argument("sim: require 0 < dt_physics <= dt_ctrl_att <= dt_ctrl_pos");
  }
  if (!(duration > 0.0)) {
    throw std::invalid_argument("sim: duration must be positive");
  }
  if (!(plant_time_constants.alpha_f > 0.0) || !(plant_time_constants.alpha_theta > 0.0)) {
    throw std::invalid_argument("sim: plant time constants must be positive");
  }
}

RigidRates rigid_derivative(const RigidState& x, const Wrench& rotor_wrench,
                            const VehicleParams& params, const DisturbanceProfile& d,
                            const Wrench& external)
{
  const Mat3& J = params.inertia;
  const Vec3 force = rotor_wrench.force + external.force;
  const Vec3 torque = rotor_wrench.torque + external.torque;
  RigidRates r;
  r.p_dot = x.v;
  r.v_dot = x.R * force / params.mass - params.gravity * e3() + d.delta_p;
  r.omega_dot = J.ldlt().solve(torque - x.omega.cross(J * x.omega)) + d.delta_r;
  return r;
}

RigidRates rigid_derivative(const RigidState& x, const ActuatorState& s, const VehicleModel& model,
                            const DisturbanceProfile& d)
{
  return rigid_derivative(x, model.wrench_from_actuators(s), model.params(), d);
}

ActuatorRates actuator_derivative(const ActuatorState& s, const ActuatorCommand& cmd,
                                  const TimeConstants& tc)
{
  return {(cmd.thrust - s.thrust) / tc.alpha_f, (cmd.tilt - s.tilt) / tc.alpha_theta};
}

TetherForce tether_wrench(const RigidState& x, const TetherState& ts, const TetherConfig& cfg)
{
  TetherForce out;
  out.world_force.setZero();
  const Vec3 a = x.p + x.R * cfg.attach;
  const Vec3 a_dot = x.v + x.R * x.omega.cross(cfg.attach);
  const Vec3 d = ts.position - a;
  const double dist = d.norm();
  if (dist <= cfg.length || dist == 0.0) {
    return out;
  }
  const Vec3 n = d / dist;
  const double dist_rate = n.dot(ts.velocity - a_dot);
  const double tension =
      cfg.stiffness * (dist - cfg.length) + cfg.damping * std::max(0.0, dist_rate);
  out.tension = tension;
  out.world_force = tension * n;
  out.body.force = x.R.transpose() * out.world_force;
  out.body.torque = cfg.attach.cross(out.body.force);
  return out;
}

PlantState hover_state(const VehicleModel& model, const Vec3& p, const Mat3& R)
{
  const auto& prm = model.params();
  Vec6 mu;
  mu << prm.mass * prm.gravity * R.transpose() * e3(), Vec3::Zero();
  PlantState s;
  s.rigid.p = p;
  s.rigid.R = R;
  s.actuators = model.actuators_from_channel_unchecked(model.allocation_pinv() * mu);
  return s;
}

namespace {

// Flat RK4 state: p, v, omega, f, theta, payload position, payload velocity.
struct Flat {
  Vec3 p, v, w;
  VecX f, th;
  Vec3 q, qd;

  Flat axpy(double h, const Flat& k) const
  {
    return {p + h * k.p, v + h * k.v, w + h * k.w, f + h * k.f, th + h * k.th,
            q + h * k.q, qd + h * k.qd};
  }
};

}  // namespace

Plant::Plant(const VehicleModel& model, DisturbanceProfile disturbance, TimeConstants plant_tc)
    : model_(&model), disturbance_(std::move(disturbance)), tc_(plant_tc)
{
  state_ = hover_state(model, Vec3::Zero());
  if (disturbance_.tether) {
    state_.tether.position = disturbance_.tether->payload_start;
  }
}

void Plant::reset(const PlantState& state)
{
  state_ = state;
  diverged_ = false;
  if (disturbance_.tether && !state_.tether.released &&
      state_.tether.position.isZero() && state_.tether.velocity.isZero()) {
    state_.tether.position = disturbance_.tether->payload_start;
  }
}

void Plant::update_tether_contact()
{
  if (!disturbance_.tether || state_.tether.released) {
    return;
  }
  const auto& cfg = *disturbance_.tether;
  const Vec3 a = state_.rigid.p + state_.rigid.R * cfg.attach;
  if (a.x() >= cfg.table_edge_x) {
    state_.tether.released = true;
  }
}

PlantOutputs Plant::outputs() const
{
  PlantOutputs o;
  o.rotor_wrench = model_->wrench_from_actuators(state_.actuators);
  Wrench ext;
  if (disturbance_.tether) {
    o.tether = tether_wrench(state_.rigid, state_.tether, *disturbance_.tether);
    ext = o.tether.body;
  } else {
    o.tether.world_force.setZero();
  }
  const RigidRates r =
      rigid_derivative(state_.rigid, o.rotor_wrench, model_->params(), disturbance_, ext);
  o.v_dot = r.v_dot;
  o.omega_dot = r.omega_dot;
  return o;
}

bool Plant::step(const ActuatorCommand& cmd, double dt)
{
  if (diverged_) {
    return false;
  }
  update_tether_contact();
  const auto& prm = model_->params();
  const bool tethered = disturbance_.tether.has_value();
  const bool free_payload = tethered && state_.tether.released;

  const auto deriv = [&](const Flat& y, const Mat3& R) {
    RigidState x{y.p, y.v, R, y.w};
    const ActuatorState s{y.f, y.th};
    Wrench ext;
    Flat k;
    k.q.setZero();
    k.qd.setZero();
    if (tethered) {
      const TetherState ts{y.q, y.qd, state_.tether.released};
      const TetherForce tf = tether_wrench(x, ts, *disturbance_.tether);
      ext = tf.body;
      if (free_payload) {
        k.q = y.qd;
        k.qd = -tf.world_force / disturbance_.tether->mass - prm.gravity * e3();
      }
    }
    const RigidRates r = rigid_derivative(x, model_->wrench_from_actuators(s), prm, disturbance_, ext);
    const ActuatorRates a = actuator_derivative(s, cmd, tc_);
    k.p = r.p_dot;
    k.v = r.v_dot;
    k.w = r.omega_dot;
    k.f = a.thrust_dot;
    k.th = a.tilt_dot;
    return k;
  };

  const auto& s0 = state_;
  const Flat y0{s0.rigid.p,         s0.rigid.v,         s0.rigid.omega,
                s0.actuators.thrust, s0.actuators.tilt, s0.tether.position,
                s0.tether.velocity};
  const Mat3& R0 = s0.rigid.R;

  const Flat k1 = deriv(y0, R0);
  const Flat y2 = y0.axpy(0.5 * dt, k1);
  const Mat3 R2 = R0 * exp_so3(y0.w, 0.5 * dt);
  const Flat k2 = deriv(y2, R2);
  const Flat y3 = y0.axpy(0.5 * dt, k2);
  const Mat3 R3 = R0 * exp_so3(y2.w, 0.5 * dt);
  const Flat k3 = deriv(y3, R3);
  const Flat y4 = y0.axpy(dt, k3);
  const Mat3 R4 = R0 * exp_so3(y3.w, dt);
  const Flat k4 = deriv(y4, R4);

  const auto combine = [](const auto& a, const auto& b, const auto& c, const auto& d) {
    return (a + 2.0 * b + 2.0 * c + d) / 6.0;
  };
  PlantState next = s0;
  next.t = s0.t + dt;
  next.rigid.p = y0.p + dt * combine(k1.p, k2.p, k3.p, k4.p);
  next.rigid.v = y0.v + dt * combine(k1.v, k2.v, k3.v, k4.v);
  next.rigid.omega = y0.w + dt * combine(k1.w, k2.w, k3.w, k4.w);
  next.actuators.thrust = y0.f + dt * combine(k1.f, k2.f, k3.f, k4.f);
  next.actuators.tilt = y0.th + dt * combine(k1.th, k2.th, k3.th, k4.th);
  const Vec3 w_mean = combine(y0.w, y2.w, y3.w, y4.w);
  next.rigid.R = project_to_so3(R0 * exp_so3(w_mean, dt));
  if (free_payload) {
    next.tether.position = y0.q + dt * combine(k1.q, k2.q, k3.q, k4.q);
    next.tether.velocity = y0.qd + dt * combine(k1.qd, k2.qd, k3.qd, k4.qd);
  }

  if (!next.rigid.finite() || !next.actuators.thrust.allFinite() ||
      !next.actuators.tilt.allFinite() || !next.tether.position.allFinite()) {
    diverged_ = true;
    return false;
  }
  state_ = next;
  return true;
}

}  // namespace omnitilt
