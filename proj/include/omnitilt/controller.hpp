#pragma once

#include <memory>
#include <optional>
#include <string>

#include "omnitilt/dynamics.hpp"
#include "omnitilt/geometry.hpp"
#include "omnitilt/vehicle_model.hpp"

namespace omnitilt {

struct Reference {
  Vec3 p_d = Vec3::Zero();
  Vec3 v_d = Vec3::Zero();
  Vec3 a_d = Vec3::Zero();  // v_d dot
  Vec3 j_d = Vec3::Zero();  // v_d double dot
  Mat3 R_d = Mat3::Identity();
  Vec3 omega_d = Vec3::Zero();      // desired-frame
  Vec3 omega_d_dot = Vec3::Zero();
  std::optional<Vec3> omega_d_ddot;  // treated as zero when absent
};

struct Gains {
  double k_tp = 9.0;
  double k_td = 6.0;
  double k_ti = 3.0;
  double k_rp = 3.0;
  double k_rd = 0.6;
  double k_ri = 0.5;
  double c1 = 2.0;
  double c2 = 0.2;
  double sigma1 = 1.0;
  double sigma2 = 0.5;
  double k_mu = 20.0;
  // reference bounds used by the robustness constants
  double a_v = 2.0;
  double a_w = 2.0;
  double a_wdot = 5.0;

  void validate() const;
};

struct ErrorState {
  Vec3 e_p = Vec3::Zero();
  Vec3 e_v = Vec3::Zero();
  Vec3 e_R = Vec3::Zero();
  Vec3 e_omega = Vec3::Zero();
  Vec3 e_pi = Vec3::Zero();
  Vec3 e_ri = Vec3::Zero();
  Vec6 e_mu = Vec6::Zero();
};

/// Tracking errors; integrals and e_mu are left at zero.
ErrorState compute_errors(const RigidState& x, const Reference& ref);

Vec3 position_integrand(const ErrorState& e, const Gains& g);
Vec3 attitude_integrand(const ErrorState& e, const Gains& g);

/// Returns `current` with its integrals advanced from `previous` by the
/// trapezoidal rule over dt.
ErrorState update_integrals(const ErrorState& previous, const ErrorState& current, const Gains& g,
                            double dt);

/// Nominal geometric PID wrench mu_d (force and torque, body frame).
Vec6 nominal_wrench(const ErrorState& e, const RigidState& x, const Reference& ref, const Gains& g,
                    const VehicleParams& params);

Vec6 kappa(const ErrorState& e, const RigidState& x, const Gains& g, const VehicleParams& params);

/// Analytic time derivative of mu_d given the body accelerations v_dot (world
/// frame) and omega_dot (body frame).
Vec6 mu_d_dot_analytic(const ErrorState& e, const RigidState& x, const Reference& ref,
                       const Gains& g, const VehicleParams& params, const Vec3& v_dot,
                       const Vec3& omega_dot);

/// Backward difference of mu_d followed by a first-order smoother.
class NumericMuDot {
 public:
  explicit NumericMuDot(double smoothing_time = 0.01) : tau_(smoothing_time) {}
  Vec6 update(const Vec6& mu_d, double dt);
  void reset() { primed_ = false; }

 private:
  double tau_;
  bool primed_ = false;
  Vec6 previous_ = Vec6::Zero();
  Vec6 output_ = Vec6::Zero();
};

/// u_c = eta_bar^-1 B^dagger (mu_d_dot - B zeta_bar - k_mu e_mu - kappa), then
/// clamped. `u` is the (estimated) channel vector. Returns the unclamped
/// command through `raw` when non-null.
ActuatorCommand backstepping_command(const VehicleModel& model, const TimeConstants& nominal,
                                     const VecX& u, const Vec6& mu_d_dot, const Vec6& e_mu,
                                     const Vec6& kappa_v, double k_mu, VecX* raw = nullptr);

/// Allocation-only command: actuators_from_channel(B^dagger mu_d), clamped.
ActuatorCommand baseline_command(const VehicleModel& model, const Vec6& mu_d);

enum class MuDotMode { analytic, numeric };

struct ControllerInput {
  double t = 0.0;
  RigidState x;
  Reference ref;
  VecX u;                          // channel vector seen by the controller
  Vec6 mu = Vec6::Zero();          // measured or estimated wrench
  Vec3 v_dot = Vec3::Zero();       // world-frame linear acceleration
  Vec3 omega_dot = Vec3::Zero();   // body angular acceleration
};

struct ControllerOutput {
  ActuatorCommand cmd;
  ErrorState errors;
  Vec6 mu_d = Vec6::Zero();
  Vec6 mu_d_dot = Vec6::Zero();
  Vec6 kappa = Vec6::Zero();
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual ControllerOutput update(const ControllerInput& in, double dt) = 0;
  virtual void reset(const Vec3& e_pi0 = Vec3::Zero(), const Vec3& e_ri0 = Vec3::Zero()) = 0;
  virtual std::string name() const = 0;
};

class BacksteppingController : public Controller {
 public:
  BacksteppingController(const VehicleModel& model, Gains gains, TimeConstants nominal,
                         MuDotMode mode = MuDotMode::analytic, double numeric_smoothing = 0.01);

  ControllerOutput update(const ControllerInput& in, double dt) override;
  void reset(const Vec3& e_pi0 = Vec3::Zero(), const Vec3& e_ri0 = Vec3::Zero()) override;
  std::string name() const override { return "proposed"; }

 private:
  const VehicleModel* model_;
  Gains gains_;
  TimeConstants nominal_;
  MuDotMode mode_;
  NumericMuDot numeric_;
  std::optional<ErrorState> previous_;
  Vec3 e_pi0_ = Vec3::Zero();
  Vec3 e_ri0_ = Vec3::Zero();
};

class BaselineController : public Controller {
 public:
  BaselineController(const VehicleModel& model, Gains gains);

  ControllerOutput update(const ControllerInput& in, double dt) override;
  void reset(const Vec3& e_pi0 = Vec3::Zero(), const Vec3& e_ri0 = Vec3::Zero()) override;
  std::string name() const override { return "baseline"; }

 private:
  const VehicleModel* model_;
  Gains gains_;
  std::optional<ErrorState> previous_;
  Vec3 e_pi0_ = Vec3::Zero();
  Vec3 e_ri0_ = Vec3::Zero();
};

std::unique_ptr<Controller> make_controller(const std::string& name, const VehicleModel& model,
                                            const Gains& gains, const TimeConstants& nominal,
                                            MuDotMode mode = MuDotMode::analytic);

}  // namespace omnitilt
