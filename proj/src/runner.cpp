#include "omnitilt/runner.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace omnitilt {

namespace {

long ratio_of(double a, double b)
{
  return std::max(1L, std::lround(a / b));
}

std::unique_ptr<Controller> build_controller(const Scenario& s, const VehicleModel& model)
{
  if (s.controller == "proposed") {
    return std::make_unique<BacksteppingController>(model, s.gains, s.vehicle.time_constants,
                                                    s.mu_dot_mode, s.numeric_mu_dot_smoothing);
  }
  return make_controller(s.controller, model, s.gains, s.vehicle.time_constants, s.mu_dot_mode);
}

PlantState initial_state(const Scenario& s, const VehicleModel& model, const Reference& ref0)
{
  const InitialCondition& ic = s.initial;
  const double angle = ic.attitude_deg * std::numbers::pi / 180.0;
  const Mat3 R0 = ref0.R_d * exp_so3(ic.attitude_axis.normalized(), angle);
  PlantState st = hover_state(model, ref0.p_d + ic.position_offset, R0);
  st.rigid.v = ref0.v_d + ic.velocity;
  st.rigid.omega = R0.transpose() * ref0.R_d * ref0.omega_d;
  if (s.disturbance.tether) {
    st.tether.position = s.disturbance.tether->payload_start;
  }
  return st;
}

}  // namespace

Simulation::Simulation(const Scenario& scenario)
    : scenario_(scenario),
      model_(std::make_unique<VehicleModel>(scenario.vehicle)),
      reference_(scenario.reference),
      imu_(scenario.estimation.noise, scenario.sim.seed, scenario.estimation.differentiate_gyro),
      estimator_(*model_, scenario.estimation.cutoff_hz),
      metrics_(scenario.settle_time, scenario.metric_rate)
{
  scenario_.validate();
  plant_ = std::make_unique<Plant>(*model_, scenario_.disturbance, scenario_.sim.plant_time_constants);
  plant_->reset(initial_state(scenario_, *model_, reference_(0.0)));
  controller_ = build_controller(scenario_, *model_);
  controller_->reset(scenario_.initial.e_pi, scenario_.initial.e_ri);
  monitor_ = std::make_unique<LyapunovMonitor>(*model_, scenario_.gains, scenario_.disturbance.delta_p,
                                               scenario_.disturbance.delta_r, scenario_.psi2);
  monitor_->reset(scenario_.initial.e_pi, scenario_.initial.e_ri);
  command_ = ActuatorCommand::hold(plant_->state().actuators);
  total_ticks_ = std::lround(scenario_.sim.duration / scenario_.sim.dt_physics);
  att_ratio_ = ratio_of(scenario_.sim.dt_ctrl_att, scenario_.sim.dt_physics);
  pos_ratio_ = ratio_of(scenario_.sim.dt_ctrl_pos, scenario_.sim.dt_physics);
}

Reference Simulation::controller_reference(double t) const
{
  Reference r = reference_(t);
  r.p_d = held_position_.p_d;
  r.v_d = held_position_.v_d;
  r.a_d = held_position_.a_d;
  r.j_d = held_position_.j_d;
  return r;
}

double Simulation::saturation_duty() const
{
  return rows_ ? static_cast<double>(saturated_rows_) / rows_ : 0.0;
}

void Simulation::sense_and_control()
{
  const double t = time();
  const double dt = scenario_.sim.dt_physics;
  const PlantState& st = plant_->state();
  const PlantOutputs out = plant_->outputs();
  if (!impulse_time_ && out.tether.tension > 0.0) {
    impulse_time_ = t;
  }
  last_record_.v_dot = out.v_dot;
  last_record_.omega_dot = out.omega_dot;
  last_record_.tension = out.tether.tension;

  const bool estimated = scenario_.measurement == MeasurementMode::estimated;
  if (estimated) {
    const ImuSample sample = imu_.sample(t, st.rigid, out.v_dot, out.omega_dot);
    if (tick_ == 0) {
      estimator_.reset(wrench_from_inverse_dynamics(sample, st.rigid, model_->params()));
    } else {
      estimator_.update(sample, st.rigid, dt);
    }
  }

  last_record_.control_tick = tick_ % att_ratio_ == 0;
  if (!last_record_.control_tick) {
    return;
  }
  if (tick_ % pos_ratio_ == 0) {
    held_position_ = reference_(t);
  }
  ControllerInput in;
  in.t = t;
  in.x = st.rigid;
  in.ref = controller_reference(t);
  const VecX u_true = model_->channel_from_actuators(st.actuators);
  if (estimated) {
    const Wrench mu_est = estimator_.value();
    const RotorEstimate rotor = rotor_thrusts_from_wrench(mu_est, *model_);
    in.u.resize(u_true.size());
    for (int i = 0; i < model_->rotor_count(); ++i) {
      in.u(2 * i) = rotor.thrust(i) * std::cos(st.actuators.tilt(i));
      in.u(2 * i + 1) = rotor.thrust(i) * std::sin(st.actuators.tilt(i));
    }
    in.mu = mu_est.stacked();
    const auto acc = accelerations_from_wrench(in.mu, st.rigid, model_->params());
    in.v_dot = acc.first;
    in.omega_dot = acc.second;
  } else {
    in.u = u_true;
    in.mu = model_->allocation() * u_true;
    in.v_dot = out.v_dot;
    in.omega_dot = out.omega_dot;
  }
  last_control_ = controller_->update(in, scenario_.sim.dt_ctrl_att);
  command_ = last_control_.cmd;
  if (observer_) observer_(*this);
}

void Simulation::record()
{
  const double t = time();
  const PlantState& st = plant_->state();
  const Reference ref = reference_(t);
  const VecX u = model_->channel_from_actuators(st.actuators);
  const Vec6 mu = model_->allocation() * u;
  const auto sample = monitor_->update(st.rigid, ref, mu, tick_ == 0 ? 0.0 : scenario_.sim.dt_physics);

  TelemetryRow& row = last_record_.row;
  row.t = t;
  row.p = st.rigid.p;
  row.v = st.rigid.v;
  row.R = st.rigid.R;
  row.omega = st.rigid.omega;
  row.f = st.actuators.thrust;
  row.theta = st.actuators.tilt;
  row.u_c = command_.interleaved();
  row.mu = mu;
  row.mu_d = sample.mu_d;
  row.e_mu = sample.errors.e_mu;
  row.V = sample.value.V;
  row.sat = command_.saturated;
  last_record_.errors = sample.errors;
  last_record_.vdot_bound = sample.bound;

  ++rows_;
  saturated_rows_ += row.sat ? 1 : 0;
  metrics_.add(t, sample.errors.e_p, sample.errors.e_R);

  if (!st.rigid.finite() || !(sample.errors.e_p.norm() <= kDivergenceDistance)) {
    diverged_ = true;
    divergence_time_ = t;
    finished_ = true;
  }
}

bool Simulation::step()
{
  if (finished_) {
    return false;
  }
  sense_and_control();
  record();
  if (finished_) {
    return false;
  }
  if (tick_ >= total_ticks_) {
    finished_ = true;
    return false;
  }
  if (!plant_->step(command_, scenario_.sim.dt_physics)) {
    diverged_ = true;
    finished_ = true;
    divergence_time_ = time() + scenario_.sim.dt_physics;
    return false;
  }
  ++tick_;
  return true;
}

std::string run_directory_name(const Scenario& s)
{
  return s.name + "_" + s.controller + "_seed" + std::to_string(s.sim.seed);
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options)
{
  Simulation sim(scenario);
  RunResult result;
  std::unique_ptr<TelemetryWriter> writer;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    result.telemetry_path = *options.out_dir / "telemetry.csv";
    writer = std::make_unique<TelemetryWriter>(*result.telemetry_path, sim.model().rotor_count());
  }
  std::vector<double> ts, Vs, bounds, eR;
  bool more = true;
  while (more) {
    more = sim.step();
    const TickRecord& rec = sim.last_record();
    if (writer) writer->write(rec.row);
    if (options.keep_records) result.records.push_back(rec);
    ts.push_back(rec.row.t);
    Vs.push_back(rec.row.V);
    bounds.push_back(rec.vdot_bound);
    eR.push_back(rec.errors.e_R.norm());
  }
  if (writer) writer->flush();

  MetricsReport& m = result.metrics;
  m.scenario = scenario.name;
  m.kind = to_string(scenario.reference.kind);
  m.controller = scenario.controller;
  m.seed = scenario.sim.seed;
  m.position_rmse = sim.online_metrics().position_rmse();
  m.rotation_rmse = sim.online_metrics().rotation_rmse();
  m.samples = sim.online_metrics().samples();
  m.diverged = sim.diverged();
  m.divergence_time = sim.divergence_time();
  m.saturation_duty = sim.saturation_duty();
  m.duration = ts.empty() ? 0.0 : ts.back();
  if (ts.size() > 2) {
    const auto cert = vdot_certificate(ts, Vs, bounds, 0.05, scenario.sim.dt_ctrl_att);
    if (cert.checked > 0) m.worst_lyapunov_margin = cert.worst_margin;
  }
  m.impulse_time = sim.impulse_time();
  if (m.impulse_time) {
    if (m.diverged) {
      m.recovery_time.reset();
    } else {
      m.recovery_time = recovery_time(ts, eR, *m.impulse_time, scenario.recovery_threshold);
    }
  }
  result.matrices = sim.monitor().matrices();

  if (options.out_dir) {
    std::ofstream(*options.out_dir / "metrics.json") << metrics_to_json(m) << "\n";
  }
  return result;
}

}  // namespace omnitilt
