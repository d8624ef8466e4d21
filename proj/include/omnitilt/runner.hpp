#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "omnitilt/metrics.hpp"
#include "omnitilt/scenario.hpp"
#include "omnitilt/telemetry.hpp"

namespace omnitilt {

/// Per-tick record kept in memory. The wrench quantities are evaluated on the
/// true state with integrals propagated at the physics rate.
struct TickRecord {
  TelemetryRow row;
  ErrorState errors;
  double vdot_bound = 0.0;
  Vec3 v_dot = Vec3::Zero();
  Vec3 omega_dot = Vec3::Zero();
  double tension = 0.0;
  bool control_tick = false;
};

/// Fixed-step closed loop: physics at dt_physics, the full control law at
/// dt_ctrl_att with the translational reference held over dt_ctrl_pos, and
/// zero-order hold on the actuator command in between.
class Simulation {
 public:
  explicit Simulation(const Scenario& scenario);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Advance one physics tick. Returns false once finished or diverged.
  bool step();

  bool finished() const { return finished_; }
  bool diverged() const { return diverged_; }
  double time() const { return tick_ * scenario_.sim.dt_physics; }
  long tick() const { return tick_; }

  const Scenario& scenario() const { return scenario_; }
  const VehicleModel& model() const { return *model_; }
  const Plant& plant() const { return *plant_; }
  const ActuatorCommand& command() const { return command_; }
  const ControllerOutput& last_control() const { return last_control_; }
  const ReferenceGenerator& reference() const { return reference_; }
  const LyapunovMonitor& monitor() const { return *monitor_; }
  const TickRecord& last_record() const { return last_record_; }

  /// Called after every controller update, before the plant advances.
  using ControlObserver = std::function<void(const Simulation&)>;
  void set_control_observer(ControlObserver observer) { observer_ = std::move(observer); }

  /// Reference seen by the controller at time t (translational part held).
  Reference controller_reference(double t) const;

  std::optional<double> impulse_time() const { return impulse_time_; }
  std::optional<double> divergence_time() const { return divergence_time_; }
  const OnlineMetrics& online_metrics() const { return metrics_; }
  double saturation_duty() const;

 private:
  void sense_and_control();
  void record();

  Scenario scenario_;
  std::unique_ptr<VehicleModel> model_;
  std::unique_ptr<Plant> plant_;
  std::unique_ptr<Controller> controller_;
  std::unique_ptr<LyapunovMonitor> monitor_;
  ReferenceGenerator reference_;
  ImuSimulator imu_;
  WrenchEstimator estimator_;
  ActuatorCommand command_;
  ControllerOutput last_control_;
  TickRecord last_record_;
  OnlineMetrics metrics_;
  long tick_ = 0;
  long total_ticks_ = 0;
  long att_ratio_ = 1;
  long pos_ratio_ = 1;
  long saturated_rows_ = 0;
  long rows_ = 0;
  Reference held_position_;
  ControlObserver observer_;
  bool finished_ = false;
  bool diverged_ = false;
  std::optional<double> impulse_time_;
  std::optional<double> divergence_time_;
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // telemetry.csv and metrics.json
  bool keep_records = true;
};

struct RunResult {
  MetricsReport metrics;
  std::vector<TickRecord> records;
  LyapunovMatrices matrices;
  std::optional<std::filesystem::path> telemetry_path;
};

RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Directory name used for a run inside an output root.
std::string run_directory_name(const Scenario& scenario);

}  // namespace omnitilt
