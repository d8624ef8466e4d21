#include "omnitilt/reference.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace omnitilt {

ScenarioKind parse_scenario_kind(const std::string& s)
{
  if (s == "lemniscate") return ScenarioKind::lemniscate;
  if (s == "roll_oscillation") return ScenarioKind::roll_oscillation;
  if (s == "tether_drop") return ScenarioKind::tether_drop;
  if (s == "hover_step") return ScenarioKind::hover_step;
  if (s == "custom") return ScenarioKind::custom;
  throw std::invalid_argument("unknown scenario kind '" + s + "'");
}

std::string to_string(ScenarioKind k)
{
  switch (k) {
    case ScenarioKind::lemniscate: return "lemniscate";
    case ScenarioKind::roll_oscillation: return "roll_oscillation";
    case ScenarioKind::tether_drop: return "tether_drop";
    case ScenarioKind::hover_step: return "hover_step";
    case ScenarioKind::custom: return "custom";
  }
  return "custom";
}

double lemniscate_path_length(double ax, double ay)
{
  const auto speed = [&](double s) {
    const double dx = ax * std::cos(s);
    const double dy = 2.0 * ay * std::cos(2.0 * s);
    return std::sqrt(dx * dx + dy * dy);
  };
  // split at quarter periods where the integrand has kinks when ax or ay is zero
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        speed, k * std::numbers::pi / 2.0, (k + 1) * std::numbers::pi / 2.0, 15, 1e-14);
  }
  return total;
}

double lemniscate_rate_for_speed(double speed, double ax, double ay)
{
  if (!(speed > 0.0) || !std::isfinite(speed)) {
    throw std::invalid_argument("lemniscate speed must be positive and finite");
  }
  const double length = lemniscate_path_length(ax, ay);
  if (!(length > 0.0)) {
    throw std::invalid_argument("lemniscate amplitudes give a zero-length path");
  }
  // mean speed over one period is length * omega / (2 pi)
  return 2.0 * std::numbers::pi * speed / length;
}

ReferenceGenerator::ReferenceGenerator(ReferenceSpec spec) : spec_(std::move(spec))
{
  if (spec_.kind == ScenarioKind::lemniscate) {
    const auto& l = spec_.lemniscate;
    omega_ = lemniscate_rate_for_speed(l.speed, l.ax, l.ay);
  }
  if (spec_.kind == ScenarioKind::tether_drop) {
    const auto& tr = spec_.translation;
    if (!(tr.speed > 0.0) || !(tr.ramp_time > 0.0) || !(tr.distance > 0.0)) {
      throw std::invalid_argument("translation: speed, ramp_time and distance must be positive");
    }
    cruise_time_ = (tr.distance - tr.speed * tr.ramp_time) / tr.speed;
    if (cruise_time_ < 0.0) {
      throw std::invalid_argument("translation: distance too short for the velocity ramps");
    }
  }
  if (spec_.kind == ScenarioKind::roll_oscillation && !(spec_.roll.frequency >= 0.0)) {
    throw std::invalid_argument("roll: frequency must be non-negative");
  }
}

Reference ReferenceGenerator::operator()(double t) const
{
  Reference r;
  r.omega_d_ddot = Vec3::Zero();
  switch (spec_.kind) {
    case ScenarioKind::lemniscate: {
      const auto& l = spec_.lemniscate;
      const double w = omega_;
      const double s1 = std::sin(w * t), c1 = std::cos(w * t);
      const double s2 = std::sin(2.0 * w * t), c2 = std::cos(2.0 * w * t);
      r.p_d = Vec3(l.ax * s1, l.ay * s2, l.z);
      r.v_d = Vec3(l.ax * w * c1, 2.0 * l.ay * w * c2, 0.0);
      r.a_d = Vec3(-l.ax * w * w * s1, -4.0 * l.ay * w * w * s2, 0.0);
      r.j_d = Vec3(-l.ax * w * w * w * c1, -8.0 * l.ay * w * w * w * c2, 0.0);
      break;
    }
    case ScenarioKind::roll_oscillation: {
      const auto& ro = spec_.roll;
      const double A = ro.amplitude_deg * std::numbers::pi / 180.0;
      const double W = 2.0 * std::numbers::pi * ro.frequency;
      const double s = std::sin(W * t), c = std::cos(W * t);
      r.p_d = ro.position;
      r.R_d = rot_x(A * s);
      r.omega_d = Vec3(A * W * c, 0.0, 0.0);
      r.omega_d_dot = Vec3(-A * W * W * s, 0.0, 0.0);
      r.omega_d_ddot = Vec3(-A * W * W * W * c, 0.0, 0.0);
      break;
    }
    case ScenarioKind::tether_drop: {
      const auto& tr = spec_.translation;
      const double V = tr.speed, Tr = tr.ramp_time;
      double x = 0.0, v = 0.0, a = 0.0, j = 0.0;
      const double t1 = tr.start_time, t2 = t1 + Tr, t3 = t2 + cruise_time_, t4 = t3 + Tr;
      if (t >= t4) {
        x = tr.distance;
      } else if (t >= t3) {
        const double u = (t - t3) / Tr;
        x = 0.5 * V * Tr + V * cruise_time_ + V * Tr * (u - u * u * u + 0.5 * u * u * u * u);
        v = V * (1.0 - (3.0 * u * u - 2.0 * u * u * u));
        a = -V / Tr * (6.0 * u - 6.0 * u * u);
        j = -V / (Tr * Tr) * (6.0 - 12.0 * u);
      } else if (t >= t2) {
        x = 0.5 * V * Tr + V * (t - t2);
        v = V;
      } else if (t >= t1) {
        const double u = (t - t1) / Tr;
        x = V * Tr * (u * u * u - 0.5 * u * u * u * u);
        v = V * (3.0 * u * u - 2.0 * u * u * u);
        a = V / Tr * (6.0 * u - 6.0 * u * u);
        j = V / (Tr * Tr) * (6.0 - 12.0 * u);
      }
      r.p_d = tr.start + Vec3(x, 0.0, 0.0);
      r.v_d = Vec3(v, 0.0, 0.0);
      r.a_d = Vec3(a, 0.0, 0.0);
      r.j_d = Vec3(j, 0.0, 0.0);
      break;
    }
    case ScenarioKind::hover_step:
    case ScenarioKind::custom: {
      const auto& sp = spec_.setpoint;
      const Vec3 rpy = sp.attitude_rpy_deg * std::numbers::pi / 180.0;
      r.p_d = sp.position;
      r.R_d = rot_z(rpy.z()) * rot_y(rpy.y()) * rot_x(rpy.x());
      break;
    }
  }
  return r;
}

}  // namespace omnitilt
