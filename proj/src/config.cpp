#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <toml.hpp>

#include "omnitilt/scenario.hpp"

namespace omnitilt {

namespace {

using Node = toml::node_view<const toml::node>;

double num(Node n, double fallback)
{
  if (!n) return fallback;
  if (auto v = n.value<double>()) return *v;
  throw std::invalid_argument("expected a number");
}

Vec3 vec3(Node n, const Vec3& fallback)
{
  if (!n) return fallback;
  const auto* arr = n.as_array();
  if (arr == nullptr || arr->size() != 3) {
    throw std::invalid_argument("expected an array of three numbers");
  }
  Vec3 v;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto x = (*arr)[i].value<double>();
    if (!x) throw std::invalid_argument("expected an array of three numbers");
    v(static_cast<int>(i)) = *x;
  }
  return v;
}

std::string str(Node n, const std::string& fallback)
{
  if (!n) return fallback;
  if (auto v = n.value<std::string>()) return *v;
  throw std::invalid_argument("expected a string");
}

bool flag(Node n, bool fallback)
{
  if (!n) return fallback;
  if (auto v = n.value<bool>()) return *v;
  throw std::invalid_argument("expected a boolean");
}

toml::table parse_text(const std::string& text)
{
  try {
    return toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "TOML parse error: " << e.description() << " at line " << e.source().begin.line;
    throw std::invalid_argument(os.str());
  }
}

std::string slurp(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

VehicleParams read_vehicle(const toml::table& root)
{
  VehicleParams p = VehicleParams::default_quad();
  const Node v = Node(root)["vehicle"];
  const int n = static_cast<int>(num(v["rotor_count"], 4));
  const double arm = num(v["arm_length"], 0.23);
  if (n < 4) {
    throw std::invalid_argument("vehicle.rotor_count must exceed 3");
  }
  p.rotors.clear();
  for (int k = 0; k < n; ++k) {
    const double phi = std::numbers::pi / 4.0 + 2.0 * std::numbers::pi * k / n;
    RotorGeometry r;
    r.tilt_axis = Vec3(std::cos(phi), std::sin(phi), 0.0);
    r.arm = arm * r.tilt_axis;
    r.spin = (k % 2 == 0) ? 1 : -1;
    p.rotors.push_back(r);
  }
  p.mass = num(v["mass"], p.mass);
  p.gravity = num(v["gravity"], p.gravity);
  p.inertia = vec3(v["inertia"], p.inertia.diagonal()).asDiagonal();
  p.drag_coeff = num(v["drag_coeff"], p.drag_coeff);
  p.time_constants.alpha_f = num(v["alpha_f"], p.time_constants.alpha_f);
  p.time_constants.alpha_theta = num(v["alpha_theta"], p.time_constants.alpha_theta);
  p.f_min = num(v["f_min"], p.f_min);
  p.f_max = num(v["f_max"], p.f_max);
  p.theta_max = num(v["theta_max"], p.theta_max);
  p.validate();
  return p;
}

Gains read_gains(const toml::table& root)
{
  Gains g;
  const Node s = Node(root)["gains"];
  g.k_tp = num(s["k_tp"], g.k_tp);
  g.k_td = num(s["k_td"], g.k_td);
  g.k_ti = num(s["k_ti"], g.k_ti);
  g.k_rp = num(s["k_rp"], g.k_rp);
  g.k_rd = num(s["k_rd"], g.k_rd);
  g.k_ri = num(s["k_ri"], g.k_ri);
  g.c1 = num(s["c1"], g.c1);
  g.c2 = num(s["c2"], g.c2);
  g.sigma1 = num(s["sigma1"], g.sigma1);
  g.sigma2 = num(s["sigma2"], g.sigma2);
  g.k_mu = num(s["k_mu"], g.k_mu);
  g.a_v = num(s["a_v"], g.a_v);
  g.a_w = num(s["a_w"], g.a_w);
  g.a_wdot = num(s["a_wdot"], g.a_wdot);
  g.validate();
  return g;
}

std::optional<UncertaintyBand> read_band(const toml::table& root, const VehicleParams& vehicle)
{
  const Node c = Node(root)["certification"];
  if (!c["delta_f"] && !c["delta_theta"] && !c["band_fraction"]) {
    return std::nullopt;
  }
  UncertaintyBand b;
  b.alpha_f = vehicle.time_constants.alpha_f;
  b.alpha_theta = vehicle.time_constants.alpha_theta;
  const double frac = num(c["band_fraction"], 0.0);
  b.delta_f = num(c["delta_f"], frac * b.alpha_f);
  b.delta_theta = num(c["delta_theta"], frac * b.alpha_theta);
  b.validate();
  return b;
}

void read_robustness_options(const toml::table& root, RobustnessOptions& o)
{
  const Node c = Node(root)["certification"];
  o.level_c = num(c["level_c"], o.level_c);
  o.samples = static_cast<int>(num(c["samples"], o.samples));
  o.seed = static_cast<std::uint64_t>(num(c["seed"], static_cast<double>(o.seed)));
  o.inflation = num(c["inflation"], o.inflation);
  o.a_jerk = num(c["a_jerk"], o.a_jerk);
  o.a_wddot = num(c["a_wddot"], o.a_wddot);
  o.max_reference_tilt = num(c["max_reference_tilt"], o.max_reference_tilt);
}

}  // namespace

void Scenario::validate() const
{
  vehicle.validate();
  sim.validate();
  gains.validate();
  if (controller != "proposed" && controller != "baseline") {
    throw std::invalid_argument("controller must be proposed or baseline");
  }
  if (!(metric_rate > 0.0) || settle_time < 0.0) {
    throw std::invalid_argument("metric_rate must be positive and settle_time non-negative");
  }
  const auto ratio = [](double a, double b) {
    const double r = a / b;
    return std::abs(r - std::round(r)) < 1e-9;
  };
  if (!ratio(sim.dt_ctrl_att, sim.dt_physics) || !ratio(sim.dt_ctrl_pos, sim.dt_physics)) {
    throw std::invalid_argument("control periods must be integer multiples of dt_physics");
  }
  if (band) band->validate();
}

Scenario parse_scenario(const std::string& text)
{
  const toml::table root = parse_text(text);
  const Node r(root);
  Scenario s;
  s.name = str(r["name"], s.name);
  s.reference.kind = parse_scenario_kind(str(r["kind"], "hover_step"));
  s.controller = str(r["controller"], s.controller);
  s.sim.duration = num(r["duration"], s.sim.duration);
  s.sim.seed = static_cast<std::uint64_t>(num(r["seed"], static_cast<double>(s.sim.seed)));
  s.settle_time = num(r["settle_time"], s.settle_time);
  s.metric_rate = num(r["metric_rate"], s.metric_rate);
  s.recovery_threshold = num(r["recovery_threshold"], s.recovery_threshold);

  const std::string meas = str(r["measurement"], "estimated");
  if (meas == "estimated") {
    s.measurement = MeasurementMode::estimated;
  } else if (meas == "perfect") {
    s.measurement = MeasurementMode::perfect;
  } else {
    throw std::invalid_argument("measurement must be estimated or perfect");
  }
  const std::string mode = str(r["mu_dot"], "analytic");
  if (mode == "analytic") {
    s.mu_dot_mode = MuDotMode::analytic;
  } else if (mode == "numeric") {
    s.mu_dot_mode = MuDotMode::numeric;
  } else {
    throw std::invalid_argument("mu_dot must be analytic or numeric");
  }
  s.numeric_mu_dot_smoothing = num(r["mu_dot_smoothing"], s.numeric_mu_dot_smoothing);

  s.vehicle = read_vehicle(root);
  s.gains = read_gains(root);

  const Node sim = r["sim"];
  s.sim.dt_physics = num(sim["dt_physics"], s.sim.dt_physics);
  s.sim.dt_ctrl_att = num(sim["dt_ctrl_att"], s.sim.dt_ctrl_att);
  s.sim.dt_ctrl_pos = num(sim["dt_ctrl_pos"], s.sim.dt_ctrl_pos);

  const Node plant = r["plant"];
  const TimeConstants& nominal = s.vehicle.time_constants;
  s.sim.plant_time_constants.alpha_f =
      num(plant["alpha_f"], nominal.alpha_f * num(plant["alpha_f_scale"], 1.0));
  s.sim.plant_time_constants.alpha_theta =
      num(plant["alpha_theta"], nominal.alpha_theta * num(plant["alpha_theta_scale"], 1.0));

  const Node dist = r["disturbance"];
  s.disturbance.delta_p = vec3(dist["delta_p"], Vec3::Zero());
  s.disturbance.delta_r = vec3(dist["delta_r"], Vec3::Zero());

  const Node est = r["estimation"];
  s.estimation.cutoff_hz = num(est["cutoff_hz"], s.estimation.cutoff_hz);
  s.estimation.noise.accel_std = num(est["accel_noise"], s.estimation.noise.accel_std);
  s.estimation.noise.gyro_std = num(est["gyro_noise"], s.estimation.noise.gyro_std);
  s.estimation.differentiate_gyro = flag(est["differentiate_gyro"], s.estimation.differentiate_gyro);

  const Node init = r["initial"];
  s.initial.position_offset = vec3(init["position_offset"], Vec3::Zero());
  s.initial.velocity = vec3(init["velocity"], Vec3::Zero());
  s.initial.attitude_axis = vec3(init["attitude_axis"], Vec3::UnitX());
  s.initial.attitude_deg = num(init["attitude_deg"], 0.0);
  s.initial.e_pi = vec3(init["e_pi"], Vec3::Zero());
  s.initial.e_ri = vec3(init["e_ri"], Vec3::Zero());

  const Node lem = r["lemniscate"];
  auto& l = s.reference.lemniscate;
  l.speed = num(lem["speed"], l.speed);
  l.ax = num(lem["ax"], l.ax);
  l.ay = num(lem["ay"], l.ay);
  l.z = num(lem["z"], l.z);

  const Node roll = r["roll"];
  auto& ro = s.reference.roll;
  ro.amplitude_deg = num(roll["amplitude_deg"], ro.amplitude_deg);
  ro.frequency = num(roll["frequency"], ro.frequency);
  ro.position = vec3(roll["position"], ro.position);

  const Node sp = r["setpoint"];
  s.reference.setpoint.position = vec3(sp["position"], s.reference.setpoint.position);
  s.reference.setpoint.attitude_rpy_deg =
      vec3(sp["attitude_rpy_deg"], s.reference.setpoint.attitude_rpy_deg);

  const Node tr = r["translation"];
  auto& t = s.reference.translation;
  t.start = vec3(tr["start"], t.start);
  t.distance = num(tr["distance"], t.distance);
  t.speed = num(tr["speed"], t.speed);
  t.start_time = num(tr["start_time"], t.start_time);
  t.ramp_time = num(tr["ramp_time"], t.ramp_time);

  const Node teth = r["tether"];
  if (s.reference.kind == ScenarioKind::tether_drop || teth) {
    TetherConfig tc;
    tc.mass = num(teth["mass"], tc.mass);
    tc.length = num(teth["length"], tc.length);
    tc.attach = vec3(teth["attach"], tc.attach);
    tc.stiffness = num(teth["stiffness"], tc.stiffness);
    tc.damping = num(teth["damping"], tc.damping);
    tc.table_height = num(teth["table_height"], tc.table_height);
    tc.table_edge_x = num(teth["table_edge_x"], tc.table_edge_x);
    tc.payload_start = vec3(teth["payload_start"], Vec3(tc.table_edge_x, tc.attach.y(), tc.table_height));
    if (!flag(teth["enabled"], true)) {
      s.disturbance.tether.reset();
    } else {
      s.disturbance.tether = tc;
    }
  }

  const Node cert = r["certification"];
  s.psi2 = num(cert["psi2"], s.psi2);
  s.band = read_band(root, s.vehicle);

  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
  return parse_scenario(slurp(path));
}

CertificationRequest parse_certification(const std::string& text)
{
  const toml::table root = parse_text(text);
  const Node r(root);
  CertificationRequest c;
  c.vehicle = read_vehicle(root);
  c.gains = read_gains(root);
  c.delta_p = vec3(r["disturbance"]["delta_p"], Vec3::Zero());
  c.delta_r = vec3(r["disturbance"]["delta_r"], Vec3::Zero());
  c.psi2 = num(r["certification"]["psi2"], c.psi2);
  c.band = read_band(root, c.vehicle);
  read_robustness_options(root, c.options);
  const Node plant = r["plant"];
  if (plant["alpha_f"] || plant["alpha_theta"] || plant["alpha_f_scale"] ||
      plant["alpha_theta_scale"]) {
    const TimeConstants& nominal = c.vehicle.time_constants;
    TimeConstants t;
    t.alpha_f = num(plant["alpha_f"], nominal.alpha_f * num(plant["alpha_f_scale"], 1.0));
    t.alpha_theta =
        num(plant["alpha_theta"], nominal.alpha_theta * num(plant["alpha_theta_scale"], 1.0));
    c.options.realized = t;
  }
  return c;
}

CertificationRequest load_certification(const std::filesystem::path& path)
{
  return parse_certification(slurp(path));
}

}  // namespace omnitilt
