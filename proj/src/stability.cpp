#include "omnitilt/stability.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "omnitilt/estimation.hpp"

namespace omnitilt {

namespace {

double inertia_min(const Mat3& J)
{
  return Eigen::SelfAdjointEigenSolver<Mat3>(J).eigenvalues().minCoeff();
}

double inertia_max(const Mat3& J)
{
  return Eigen::SelfAdjointEigenSolver<Mat3>(J).eigenvalues().maxCoeff();
}

double spectral_norm(const MatX& A)
{
  return Eigen::JacobiSVD<MatX>(A).singularValues()(0);
}

// Antiderivative of k sat_sigma(s) - delta.
double potential_1d(double s, double k, double sigma, double delta)
{
  const double a = std::abs(s);
  const double S = a <= sigma ? 0.5 * s * s : sigma * a - 0.5 * sigma * sigma;
  return k * S - delta * s;
}

Vec3 random_unit(std::mt19937_64& rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  while (v.norm() < 1e-9) {
    v = Vec3(n(rng), n(rng), n(rng));
  }
  return v.normalized();
}

Vec3 random_in_ball(std::mt19937_64& rng, double radius)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return radius * std::cbrt(u(rng)) * random_unit(rng);
}

// Sample (a, b) >= 0 uniformly in the box with [a b] M [a b]^T <= c.
Vec2 sample_z(std::mt19937_64& rng, const Mat2& M, double c, double cap_a)
{
  const double r = std::sqrt(c / lambda_min(M));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Vec2 z(std::min(r, cap_a) * u(rng), r * u(rng));
    if (z.dot(M * z) <= c) {
      return z;
    }
  }
  return Vec2::Zero();
}

// sup over tilt angles of |B D B^dagger| where D is the block diagonal of
// Rot(theta) diag(a, b) Rot(theta)^T.
double mismatch_norm(const VehicleModel& model, double a, double b, std::mt19937_64& rng)
{
  const int n = model.rotor_count();
  const auto eval = [&](const VecX& th) {
    MatX D = MatX::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
      const double c = std::cos(th(i));
      const double s = std::sin(th(i));
      Mat2 rot;
      rot << c, -s, s, c;
      D.block<2, 2>(2 * i, 2 * i) = rot * Vec2(a, b).asDiagonal() * rot.transpose();
    }
    return spectral_norm(model.allocation() * D * model.allocation_pinv());
  };
  const double tmax = model.params().theta_max;
  std::uniform_real_distribution<double> u(-tmax, tmax);
  double best = eval(VecX::Zero(n));
  for (int k = 0; k < 400; ++k) {
    VecX th(n);
    for (int i = 0; i < n; ++i) {
      th(i) = u(rng);
    }
    best = std::max(best, eval(th));
  }
  return best;
}

}  // namespace

double c1_upper_bound(double k_tp, double k_td)
{
  return std::min(std::sqrt(k_tp), 4.0 * k_tp * k_td / (k_td * k_td + 4.0 * k_tp));
}

double c2_upper_bound(double k_rp, double k_rd, const Mat3& J)
{
  const double lm = inertia_min(J);
  const double lM = inertia_max(J);
  return std::min(std::sqrt(k_rp * lm),
                  4.0 * lm * lm * k_rp * k_rd / (4.0 * k_rp * lm * lm + k_rd * k_rd * lM));
}

Condition1Report check_condition1(const Gains& g, const VehicleParams& params, const Vec3& delta_p,
                                  const Vec3& delta_r)
{
  Condition1Report r;
  r.c1_bound = c1_upper_bound(g.k_tp, g.k_td);
  r.c2_bound = c2_upper_bound(g.k_rp, g.k_rd, params.inertia);
  r.c1_ok = g.c1 < r.c1_bound;
  r.c2_ok = g.c2 < r.c2_bound;
  r.integral_p_ok = g.k_ti * g.sigma1 > delta_p.lpNorm<Eigen::Infinity>();
  r.integral_r_ok = g.k_ri * g.sigma2 > delta_r.lpNorm<Eigen::Infinity>();
  return r;
}

double integral_potential(const Vec3& e, double k, double sigma, const Vec3& delta)
{
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    total += potential_1d(e(i), k, sigma, delta(i)) - potential_1d(delta(i) / k, k, sigma, delta(i));
  }
  return total;
}

LyapunovValue lyapunov_V(const ErrorState& e, const RigidState& x, const Reference& ref,
                         const Gains& g, const VehicleParams& params, const Vec3& delta_p,
                         const Vec3& delta_r)
{
  LyapunovValue out;
  out.V_Ip = integral_potential(e.e_pi, g.k_ti, g.sigma1, delta_p);
  out.V_IR = integral_potential(e.e_ri, g.k_ri, g.sigma2, delta_r);
  out.V1 = 0.5 * g.k_tp * e.e_p.squaredNorm() + 0.5 * e.e_v.squaredNorm() +
           g.c1 * e.e_p.dot(e.e_v) + out.V_Ip;
  out.V2 = 0.5 * e.e_omega.dot(params.inertia * e.e_omega) + g.k_rp * psi(x.R, ref.R_d) +
           g.c2 * e.e_R.dot(e.e_omega) + out.V_IR;
  out.V = 0.5 * e.e_mu.squaredNorm() + out.V1 + out.V2;
  return out;
}

LyapunovMatrices lyapunov_matrices(const Gains& g, const VehicleParams& params, double psi2)
{
  if (!(psi2 > 0.0 && psi2 < 2.0)) {
    throw std::invalid_argument("psi2 must lie in (0, 2)");
  }
  const double lm = inertia_min(params.inertia);
  const double lM = inertia_max(params.inertia);
  LyapunovMatrices m;
  m.M11 << g.k_tp, -g.c1, -g.c1, 1.0;
  m.M12 << g.k_tp, g.c1, g.c1, 1.0;
  m.M21 << g.k_rp, -g.c2, -g.c2, lm;
  m.M22 << 2.0 * g.k_rp / (2.0 - psi2), g.c2, g.c2, lM;
  m.W1 << g.c1 * g.k_tp, -0.5 * g.c1 * g.k_td, -0.5 * g.c1 * g.k_td, g.k_td - g.c1;
  m.W2 << g.c2 * g.k_rp / lM, -g.c2 * g.k_rd / (2.0 * lm), -g.c2 * g.k_rd / (2.0 * lm),
      g.k_rd - g.c2;
  m.M11 *= 0.5;
  m.M12 *= 0.5;
  m.M21 *= 0.5;
  m.M22 *= 0.5;
  m.W1 *= 0.5;
  m.W2 *= 0.5;
  return m;
}

double lambda_min(const Mat2& M)
{
  return Eigen::SelfAdjointEigenSolver<Mat2>(M).eigenvalues()(0);
}

double lambda_max(const Mat2& M)
{
  return Eigen::SelfAdjointEigenSolver<Mat2>(M).eigenvalues()(1);
}

double vdot_bound(const ErrorState& e, const Gains& g, const LyapunovMatrices& m)
{
  const Vec2 z1(e.e_p.norm(), e.e_v.norm());
  const Vec2 z2(e.e_R.norm(), e.e_omega.norm());
  return g.k_mu * e.e_mu.squaredNorm() + z1.dot(m.W1 * z1) + z2.dot(m.W2 * z2);
}

VdotCertificate vdot_certificate(const std::vector<double>& t, const std::vector<double>& V,
                                 const std::vector<double>& bound, double tol, double t_start)
{
  if (t.size() != V.size() || t.size() != bound.size()) {
    throw std::invalid_argument("vdot_certificate: series lengths differ");
  }
  VdotCertificate c;
  c.margins.assign(t.size(), std::numeric_limits<double>::quiet_NaN());
  c.worst_margin = std::numeric_limits<double>::infinity();
  std::size_t passed = 0;
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    if (t[k] < t_start) {
      continue;
    }
    const double vdot = (V[k + 1] - V[k - 1]) / (t[k + 1] - t[k - 1]);
    const double margin = -vdot - (1.0 - tol) * bound[k];
    c.margins[k] = margin;
    ++c.checked;
    if (margin >= 0.0) {
      ++passed;
    } else {
      c.violations.push_back(k);
    }
    c.worst_margin = std::min(c.worst_margin, margin);
  }
  c.pass_fraction = c.checked > 0 ? static_cast<double>(passed) / c.checked : 1.0;
  if (c.checked == 0) {
    c.worst_margin = 0.0;
  }
  return c;
}

LyapunovMonitor::LyapunovMonitor(const VehicleModel& model, Gains gains, Vec3 delta_p,
                                 Vec3 delta_r, double psi2)
    : model_(&model),
      gains_(gains),
      delta_p_(std::move(delta_p)),
      delta_r_(std::move(delta_r)),
      matrices_(lyapunov_matrices(gains, model.params(), psi2))
{
}

void LyapunovMonitor::reset(const Vec3& e_pi0, const Vec3& e_ri0)
{
  previous_.reset();
  e_pi0_ = e_pi0;
  e_ri0_ = e_ri0;
}

LyapunovMonitor::Sample LyapunovMonitor::update(const RigidState& x, const Reference& ref,
                                                const Vec6& mu, double dt)
{
  ErrorState e = compute_errors(x, ref);
  if (previous_) {
    e = update_integrals(*previous_, e, gains_, dt);
  } else {
    e.e_pi = e_pi0_;
    e.e_ri = e_ri0_;
  }
  previous_ = e;
  Sample s;
  s.mu_d = nominal_wrench(e, x, ref, gains_, model_->params());
  e.e_mu = mu - s.mu_d;
  s.errors = e;
  s.value = lyapunov_V(e, x, ref, gains_, model_->params(), delta_p_, delta_r_);
  s.bound = vdot_bound(e, gains_, matrices_);
  return s;
}

void UncertaintyBand::validate() const
{
  if (!(alpha_f > 0.0) || !(alpha_theta > 0.0) || delta_f < 0.0 || delta_theta < 0.0) {
    throw std::invalid_argument("uncertainty band: nominal constants must be positive");
  }
  if (!(2.0 * delta_f < alpha_f) || !(2.0 * delta_theta < alpha_theta)) {
    throw std::invalid_argument("uncertainty band: delta must stay below half the nominal value");
  }
}

RobustnessReport robustness_constants(const Gains& g, const VehicleModel& model,
                                      const UncertaintyBand& band, const RobustnessOptions& opt)
{
  band.validate();
  const VehicleParams& prm = model.params();
  const int n = model.rotor_count();
  const LyapunovMatrices mats = lyapunov_matrices(g, prm, opt.psi2);
  const double lM = inertia_max(prm.inertia);
  const double c = opt.level_c;
  RobustnessReport r;

  r.norm_B = spectral_norm(model.allocation());
  r.norm_B_pinv = spectral_norm(model.allocation_pinv());

  const double z1_max = std::sqrt(c / lambda_min(mats.M11));
  const double z2_max = std::sqrt(c / lambda_min(mats.M21));
  r.L1 = prm.mass * std::hypot(g.k_tp, g.k_td);
  r.L2 = std::hypot(g.k_rp, lM * z2_max + 3.0 * g.a_w * lM + g.k_rd);
  r.L0 = prm.mass * (prm.gravity + g.a_v + g.k_ti * g.sigma1) +
         lM * (2.0 * g.a_w * g.a_w + g.a_wdot) + g.k_ri * g.sigma2;
  r.rho = r.norm_B_pinv * (std::sqrt(2.0 * c) + r.L1 * z1_max + r.L2 * z2_max + r.L0);
  r.f_max_bound = r.rho;

  // worst case of |1/alpha_bar - 1/alpha| taken at the lower band edge
  const auto d_of = [](double a_bar, double d) {
    const double a = a_bar - d;
    return d / (a * (a - d));
  };
  r.d_f = d_of(band.alpha_f, band.delta_f);
  r.d_theta = d_of(band.alpha_theta, band.delta_theta);
  r.delta_eta_bound = std::hypot(r.d_f, r.f_max_bound * r.d_theta);
  r.delta_zeta_bound = 2.0 * r.f_max_bound * std::hypot(r.d_f, prm.theta_max * r.d_theta);
  r.delta_zeta_total = std::sqrt(static_cast<double>(n)) * r.delta_zeta_bound;

  // Delta eta eta_bar^-1 = Rot diag(abar_f / a_f - 1, abar_t / a_t - 1) Rot^T per rotor
  const auto ratio = [](double a_bar, double a) { return a_bar / a - 1.0; };
  const double af_lo = band.alpha_f - band.delta_f, af_hi = band.alpha_f + band.delta_f;
  const double at_lo = band.alpha_theta - band.delta_theta,
               at_hi = band.alpha_theta + band.delta_theta;
  r.eta_ratio_band = std::max({std::abs(ratio(band.alpha_f, af_lo)),
                               std::abs(ratio(band.alpha_f, af_hi)),
                               std::abs(ratio(band.alpha_theta, at_lo)),
                               std::abs(ratio(band.alpha_theta, at_hi))});
  r.gamma_product = 1.0 - r.norm_B * r.eta_ratio_band * r.norm_B_pinv;

  std::mt19937_64 rng(opt.seed);
  double sup_band = 0.0;
  for (double af : {af_lo, af_hi}) {
    for (double at : {at_lo, at_hi}) {
      sup_band = std::max(sup_band, mismatch_norm(model, ratio(band.alpha_f, af),
                                                  ratio(band.alpha_theta, at), rng));
    }
  }
  r.gamma_direct_band = 1.0 - sup_band;
  r.gamma = r.gamma_direct_band;
  if (opt.realized) {
    const double s = mismatch_norm(model, ratio(band.alpha_f, opt.realized->alpha_f),
                                   ratio(band.alpha_theta, opt.realized->alpha_theta), rng);
    r.gamma_direct_realized = 1.0 - s;
    r.gamma = *r.gamma_direct_realized;
  }

  // Sampled envelope |mu_d_dot - B zeta_bar - kappa| <= M0 + M1 |z1| + M2 |z2| over the level set
  const TimeConstants nominal{band.alpha_f, band.alpha_theta};
  const double phi_max = std::acos(1.0 - std::min(opt.psi2, 1.0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::Vector3d> features;
  std::vector<double> ys;
  features.reserve(opt.samples);
  ys.reserve(opt.samples);
  int attempts = 0;
  while (static_cast<int>(ys.size()) < opt.samples && attempts < 50 * opt.samples) {
    ++attempts;
    const Vec2 z1 = sample_z(rng, mats.M11, c, std::numeric_limits<double>::infinity());
    const Vec2 z2 = sample_z(rng, mats.M21, c, 1.0);
    const double phi = std::asin(std::min(1.0, z2(0)));
    if (phi > phi_max) {
      continue;
    }
    Reference ref;
    ref.R_d = exp_so3(random_unit(rng), opt.max_reference_tilt * unit(rng));
    ref.a_d = random_in_ball(rng, g.a_v);
    ref.j_d = random_in_ball(rng, opt.a_jerk);
    ref.omega_d = random_in_ball(rng, g.a_w);
    ref.omega_d_dot = random_in_ball(rng, g.a_wdot);
    ref.omega_d_ddot = random_in_ball(rng, opt.a_wddot);
    ref.p_d = Vec3::Zero();
    ref.v_d = random_in_ball(rng, 2.0);

    RigidState x;
    x.R = ref.R_d * exp_so3(random_unit(rng), phi);
    x.p = ref.p_d + z1(0) * random_unit(rng);
    x.v = ref.v_d + z1(1) * random_unit(rng);
    x.omega = x.R.transpose() * ref.R_d * ref.omega_d + z2(1) * random_unit(rng);

    ErrorState e = compute_errors(x, ref);
    e.e_pi = Vec3(unit(rng) - 0.5, unit(rng) - 0.5, unit(rng) - 0.5) * 3.0 * g.sigma1;
    e.e_ri = Vec3(unit(rng) - 0.5, unit(rng) - 0.5, unit(rng) - 0.5) * 3.0 * g.sigma2;
    Vec6 e_mu;
    e_mu << random_in_ball(rng, 1.0), random_in_ball(rng, 1.0);
    e_mu *= std::sqrt(2.0 * c) * unit(rng) / std::max(e_mu.norm(), 1e-12);
    e.e_mu = e_mu;

    const Vec6 mu_d = nominal_wrench(e, x, ref, g, prm);
    const Vec6 mu = mu_d + e_mu;
    const VecX u = model.allocation_pinv() * mu;
    bool feasible = true;
    for (int i = 0; i < n; ++i) {
      if (std::hypot(u(2 * i), u(2 * i + 1)) < prm.f_min) {
        feasible = false;
      }
    }
    if (!feasible) {
      continue;
    }
    auto [v_dot, w_dot] = accelerations_from_wrench(mu, x, prm);
    v_dot += opt.delta_p;
    w_dot += opt.delta_r;
    const Vec6 md = mu_d_dot_analytic(e, x, ref, g, prm, v_dot, w_dot);
    const double y =
        (md - model.allocation() * model.zeta(u, nominal) - kappa(e, x, g, prm)).norm();
    features.emplace_back(1.0, Vec2(e.e_p.norm(), e.e_v.norm()).norm(),
                          Vec2(e.e_R.norm(), e.e_omega.norm()).norm());
    ys.push_back(y);
  }
  r.samples_used = static_cast<int>(ys.size());
  if (ys.empty()) {
    r.note = "no feasible samples in the level set";
    return r;
  }
  MatX A(ys.size(), 3);
  VecX b(ys.size());
  for (std::size_t k = 0; k < ys.size(); ++k) {
    A.row(k) = features[k].transpose();
    b(k) = ys[k];
  }
  Eigen::Vector3d coef = A.colPivHouseholderQr().solve(b);
  coef(1) = std::max(coef(1), 0.0);
  coef(2) = std::max(coef(2), 0.0);
  double m0 = 0.0;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    m0 = std::max(m0, ys[k] - coef(1) * features[k](1) - coef(2) * features[k](2));
  }
  r.M0 = opt.inflation * m0;
  r.M1 = opt.inflation * coef(1);
  r.M2 = opt.inflation * coef(2);

  const double lW1 = lambda_min(mats.W1);
  const double lW2 = lambda_min(mats.W2);
  const double gm = r.gamma;
  if (!(gm > 0.0)) {
    r.feasible = false;
    r.note = "gamma <= 0: uncertainty too large for this geometry";
    return r;
  }
  const double k_mu = g.k_mu;
  const double one_m = (1.0 - gm) * (1.0 - gm);
  r.k_mu_lower = one_m / gm * std::max(r.M1 * r.M1 / lW1, r.M2 * r.M2 / lW2);
  r.beta1 = 0.5 * k_mu * gm;
  r.beta2 = lW1 - one_m * r.M1 * r.M1 / (k_mu * gm);
  r.beta3 = lW2 - one_m * r.M2 * r.M2 / (k_mu * gm);
  r.beta4 = (r.norm_B * r.norm_B * r.delta_zeta_total * r.delta_zeta_total + one_m * r.M0 * r.M0) /
            (k_mu * gm);
  r.c_v = std::min({2.0 * r.beta1, r.beta2 / lambda_max(mats.M12), r.beta3 / lambda_max(mats.M22)});
  r.feasible = lW1 > 0.0 && lW2 > 0.0 && k_mu > r.k_mu_lower && r.c_v > 0.0;
  if (!r.feasible) {
    r.note = k_mu <= r.k_mu_lower ? "k_mu below the required lower bound" : "W1 or W2 not positive definite";
  }
  return r;
}

bool CertificationReport::ok() const
{
  const bool pd = lambda_min(matrices.M11) > 0.0 && lambda_min(matrices.M21) > 0.0 &&
                  lambda_min(matrices.W1) > 0.0 && lambda_min(matrices.W2) > 0.0;
  return condition1.ok() && pd && (!robustness || robustness->feasible);
}

namespace {

nlohmann::json mat_json(const Mat2& M)
{
  return {{"matrix", {{M(0, 0), M(0, 1)}, {M(1, 0), M(1, 1)}}},
          {"eigenvalues", {lambda_min(M), lambda_max(M)}}};
}

}  // namespace

std::string CertificationReport::to_json() const
{
  nlohmann::json j;
  j["ok"] = ok();
  j["psi2"] = psi2;
  j["condition1"] = {{"c1_bound", condition1.c1_bound},     {"c2_bound", condition1.c2_bound},
                     {"c1_ok", condition1.c1_ok},           {"c2_ok", condition1.c2_ok},
                     {"integral_p_ok", condition1.integral_p_ok},
                     {"integral_r_ok", condition1.integral_r_ok}};
  j["matrices"] = {{"M11", mat_json(matrices.M11)}, {"M12", mat_json(matrices.M12)},
                   {"M21", mat_json(matrices.M21)}, {"M22", mat_json(matrices.M22)},
                   {"W1", mat_json(matrices.W1)},   {"W2", mat_json(matrices.W2)}};
  if (robustness) {
    const auto& r = *robustness;
    nlohmann::json rj = {{"rho", r.rho},
                         {"f_max_bound", r.f_max_bound},
                         {"d_f", r.d_f},
                         {"d_theta", r.d_theta},
                         {"delta_eta_bound", r.delta_eta_bound},
                         {"delta_zeta_bound", r.delta_zeta_bound},
                         {"L0", r.L0},
                         {"L1", r.L1},
                         {"L2", r.L2},
                         {"M0", r.M0},
                         {"M1", r.M1},
                         {"M2", r.M2},
                         {"norm_B", r.norm_B},
                         {"norm_B_pinv", r.norm_B_pinv},
                         {"gamma_product", r.gamma_product},
                         {"gamma_direct_band", r.gamma_direct_band},
                         {"gamma", r.gamma},
                         {"beta1", r.beta1},
                         {"beta2", r.beta2},
                         {"beta3", r.beta3},
                         {"beta4", r.beta4},
                         {"k_mu_lower", r.k_mu_lower},
                         {"c_v", r.c_v},
                         {"feasible", r.feasible},
                         {"samples", r.samples_used},
                         {"note", r.note}};
    if (r.gamma_direct_realized) {
      rj["gamma_direct_realized"] = *r.gamma_direct_realized;
    }
    j["robustness"] = rj;
  }
  return j.dump(2);
}

std::string CertificationReport::to_text() const
{
  std::ostringstream os;
  os << std::setprecision(6);
  const auto line = [&](const std::string& k, const auto& v) { os << k << ": " << v << "\n"; };
  const auto mat = [&](const std::string& k, const Mat2& M) {
    os << k << ": [[" << M(0, 0) << ", " << M(0, 1) << "], [" << M(1, 0) << ", " << M(1, 1)
       << "]] eig_min=" << lambda_min(M) << " eig_max=" << lambda_max(M) << "\n";
  };
  line("certified", ok() ? "yes" : "no");
  line("c1", gains.c1);
  line("c1_bound", condition1.c1_bound);
  line("c1_ok", condition1.c1_ok);
  line("c2", gains.c2);
  line("c2_bound", condition1.c2_bound);
  line("c2_ok", condition1.c2_ok);
  line("integral_p_ok", condition1.integral_p_ok);
  line("integral_r_ok", condition1.integral_r_ok);
  line("psi2", psi2);
  mat("M11", matrices.M11);
  mat("M12", matrices.M12);
  mat("M21", matrices.M21);
  mat("M22", matrices.M22);
  mat("W1", matrices.W1);
  mat("W2", matrices.W2);
  if (robustness) {
    const auto& r = *robustness;
    line("rho", r.rho);
    line("f_max_bound", r.f_max_bound);
    line("d_f", r.d_f);
    line("d_theta", r.d_theta);
    line("delta_eta_bound", r.delta_eta_bound);
    line("delta_zeta_bound", r.delta_zeta_bound);
    line("L0", r.L0);
    line("L1", r.L1);
    line("L2", r.L2);
    line("M0", r.M0);
    line("M1", r.M1);
    line("M2", r.M2);
    line("gamma_product", r.gamma_product);
    line("gamma_direct_band", r.gamma_direct_band);
    if (r.gamma_direct_realized) {
      line("gamma_direct_realized", *r.gamma_direct_realized);
    }
    line("gamma", r.gamma);
    line("beta1", r.beta1);
    line("beta2", r.beta2);
    line("beta3", r.beta3);
    line("beta4", r.beta4);
    line("k_mu", gains.k_mu);
    line("k_mu_lower", r.k_mu_lower);
    line("c_v", r.c_v);
    line("robust_feasible", r.feasible);
    if (!r.note.empty()) {
      line("note", r.note);
    }
  }
  return os.str();
}

CertificationReport certify(const Gains& g, const VehicleModel& model, const Vec3& delta_p,
                            const Vec3& delta_r, double psi2,
                            const std::optional<UncertaintyBand>& band,
                            const RobustnessOptions& opt)
{
  CertificationReport rep;
  rep.gains = g;
  rep.psi2 = psi2;
  rep.condition1 = check_condition1(g, model.params(), delta_p, delta_r);
  rep.matrices = lyapunov_matrices(g, model.params(), psi2);
  if (band) {
    RobustnessOptions o = opt;
    o.psi2 = psi2;
    o.delta_p = delta_p;
    o.delta_r = delta_r;
    rep.robustness = robustness_constants(g, model, *band, o);
  }
  return rep;
}

}  // namespace omnitilt
