#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "omnitilt/controller.hpp"
#include "omnitilt/vehicle_model.hpp"

namespace omnitilt {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

struct Condition1Report {
  double c1_bound = 0.0;
  double c2_bound = 0.0;
  bool c1_ok = false;
  bool c2_ok = false;
  bool integral_p_ok = false;  // k_ti sigma1 > |delta_p|_inf
  bool integral_r_ok = false;  // k_ri sigma2 > |delta_r|_inf

  bool ok() const { return c1_ok && c2_ok && integral_p_ok && integral_r_ok; }
};

double c1_upper_bound(double k_tp, double k_td);
double c2_upper_bound(double k_rp, double k_rd, const Mat3& J);

Condition1Report check_condition1(const Gains& g, const VehicleParams& params,
                                  const Vec3& delta_p = Vec3::Zero(),
                                  const Vec3& delta_r = Vec3::Zero());

/// Closed-form sum over components of the integral of k sat(s) - delta from
/// delta / k to e.
double integral_potential(const Vec3& e, double k, double sigma, const Vec3& delta);

struct LyapunovValue {
  double V = 0.0;
  double V1 = 0.0;
  double V2 = 0.0;
  double V_Ip = 0.0;
  double V_IR = 0.0;
};

LyapunovValue lyapunov_V(const ErrorState& e, const RigidState& x, const Reference& ref,
                         const Gains& g, const VehicleParams& params, const Vec3& delta_p,
                         const Vec3& delta_r);

struct LyapunovMatrices {
  Mat2 M11, M12, M21, M22, W1, W2;
};

LyapunovMatrices lyapunov_matrices(const Gains& g, const VehicleParams& params, double psi2 = 1.9);

double lambda_min(const Mat2& M);
double lambda_max(const Mat2& M);

/// k_mu |e_mu|^2 + z1^T W1 z1 + z2^T W2 z2.
double vdot_bound(const ErrorState& e, const Gains& g, const LyapunovMatrices& m);

struct VdotCertificate {
  std::vector<double> margins;  // -V_dot - (1 - tol) * bound, per tick (NaN outside window)
  std::vector<std::size_t> violations;
  double worst_margin = 0.0;
  double pass_fraction = 1.0;
  std::size_t checked = 0;
};

/// Central-difference V_dot against the certified bound on ticks with t >= t_start.
VdotCertificate vdot_certificate(const std::vector<double>& t, const std::vector<double>& V,
                                 const std::vector<double>& bound, double tol, double t_start);

/// Tracks the Lyapunov function along a simulated trajectory using the true
/// wrench and integrals propagated at the sampling rate.
class LyapunovMonitor {
 public:
  LyapunovMonitor(const VehicleModel& model, Gains gains, Vec3 delta_p, Vec3 delta_r,
                  double psi2 = 1.9);

  void reset(const Vec3& e_pi0, const Vec3& e_ri0);

  struct Sample {
    ErrorState errors;
    Vec6 mu_d = Vec6::Zero();
    LyapunovValue value;
    double bound = 0.0;
  };

  Sample update(const RigidState& x, const Reference& ref, const Vec6& mu, double dt);

  const LyapunovMatrices& matrices() const { return matrices_; }

 private:
  const VehicleModel* model_;
  Gains gains_;
  Vec3 delta_p_;
  Vec3 delta_r_;
  LyapunovMatrices matrices_;
  std::optional<ErrorState> previous_;
  Vec3 e_pi0_ = Vec3::Zero();
  Vec3 e_ri0_ = Vec3::Zero();
};

struct UncertaintyBand {
  double alpha_f = 0.05;
  double delta_f = 0.0;
  double alpha_theta = 0.1;
  double delta_theta = 0.0;

  void validate() const;
};

struct RobustnessOptions {
  double level_c = 1.0;
  double psi2 = 1.9;
  int samples = 10000;
  std::uint64_t seed = 7;
  double inflation = 1.2;
  double a_jerk = 5.0;           // bound on the reference jerk
  double a_wddot = 5.0;          // bound on the reference angular jerk
  double max_reference_tilt = 1.0;  // [rad]
  Vec3 delta_p = Vec3::Zero();
  Vec3 delta_r = Vec3::Zero();
  std::optional<TimeConstants> realized;  // true plant constants, if known
};

struct RobustnessReport {
  double rho = 0.0;
  double f_max_bound = 0.0;
  double d_f = 0.0;
  double d_theta = 0.0;
  double delta_eta_bound = 0.0;   // per rotor
  double delta_zeta_bound = 0.0;  // per rotor
  double delta_zeta_total = 0.0;  // stacked
  double L0 = 0.0, L1 = 0.0, L2 = 0.0;
  double M0 = 0.0, M1 = 0.0, M2 = 0.0;
  double norm_B = 0.0;
  double norm_B_pinv = 0.0;
  double eta_ratio_band = 0.0;     // sup over the band of |Delta eta eta_bar^-1|
  double gamma_product = 0.0;      // 1 - |B| |Delta eta eta^-1| |B^dagger| over the band
  double gamma_direct_band = 0.0;  // 1 - sup |B Delta eta eta_bar^-1 B^dagger| over the band
  std::optional<double> gamma_direct_realized;
  double gamma = 0.0;              // value used below
  double beta1 = 0.0, beta2 = 0.0, beta3 = 0.0, beta4 = 0.0;
  double k_mu_lower = 0.0;
  double c_v = 0.0;
  bool feasible = false;
  std::string note;
  int samples_used = 0;
};

RobustnessReport robustness_constants(const Gains& g, const VehicleModel& model,
                                      const UncertaintyBand& band, const RobustnessOptions& opt);

struct CertificationReport {
  Gains gains;
  double psi2 = 1.9;
  Condition1Report condition1;
  LyapunovMatrices matrices;
  std::optional<RobustnessReport> robustness;

  bool ok() const;
  std::string to_text() const;
  std::string to_json() const;
};

CertificationReport certify(const Gains& g, const VehicleModel& model, const Vec3& delta_p,
                            const Vec3& delta_r, double psi2,
                            const std::optional<UncertaintyBand>& band,
                            const RobustnessOptions& opt);

}  // namespace omnitilt
