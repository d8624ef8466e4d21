#include "omnitilt/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace omnitilt {

bool is_metric_sample(double t, double settle_time, double rate_hz)
{
  if (t < settle_time - 1e-9) {
    return false;
  }
  const double k = t * rate_hz;
  return std::abs(k - std::round(k)) < 1e-6;
}

void OnlineMetrics::add(double t, const Vec3& e_p, const Vec3& e_R)
{
  if (!is_metric_sample(t, settle_, rate_)) {
    return;
  }
  sum_p_ += e_p.cwiseAbs2();
  sum_r_ += e_R.cwiseAbs2();
  ++count_;
}

double OnlineMetrics::position_rmse() const
{
  if (count_ == 0) return 0.0;
  return (sum_p_ / count_).cwiseSqrt().mean();
}

double OnlineMetrics::rotation_rmse() const
{
  if (count_ == 0) return 0.0;
  return (sum_r_ / count_).cwiseSqrt().mean();
}

MetricsReport metrics_from_telemetry(const std::vector<TelemetryRow>& rows,
                                     const ReferenceGenerator& reference, double settle_time,
                                     double rate_hz)
{
  OnlineMetrics acc(settle_time, rate_hz);
  MetricsReport m;
  int control_ticks = 0;
  int saturated = 0;
  for (const auto& r : rows) {
    const Reference ref = reference(r.t);
    acc.add(r.t, r.p - ref.p_d, rotation_error(r.R, ref.R_d));
    ++control_ticks;
    saturated += r.sat ? 1 : 0;
  }
  m.position_rmse = acc.position_rmse();
  m.rotation_rmse = acc.rotation_rmse();
  m.samples = acc.samples();
  m.duration = rows.empty() ? 0.0 : rows.back().t;
  m.saturation_duty = control_ticks ? static_cast<double>(saturated) / control_ticks : 0.0;
  return m;
}

std::optional<double> recovery_time(const std::vector<double>& t,
                                    const std::vector<double>& e_r_norm, double t_impulse,
                                    double threshold)
{
  if (t.size() != e_r_norm.size() || t.empty()) {
    return std::nullopt;
  }
  if (!(e_r_norm.back() < threshold)) {
    return std::nullopt;
  }
  // first sample after the impulse from which the error stays below threshold
  double settled = t_impulse;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= t_impulse && !(e_r_norm[k] < threshold) && k + 1 < t.size()) {
      settled = t[k + 1];
    }
  }
  return settled - t_impulse;
}

namespace {

template <typename T>
nlohmann::json opt(const std::optional<T>& v)
{
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> opt_double(const nlohmann::json& j, const char* key)
{
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::string metrics_to_json(const MetricsReport& m)
{
  nlohmann::json j = {{"scenario", m.scenario},
                      {"kind", m.kind},
                      {"controller", m.controller},
                      {"seed", m.seed},
                      {"position_rmse", m.position_rmse},
                      {"rotation_rmse", m.rotation_rmse},
                      {"samples", m.samples},
                      {"diverged", m.diverged},
                      {"divergence_time", opt(m.divergence_time)},
                      {"saturation_duty", m.saturation_duty},
                      {"worst_lyapunov_margin", opt(m.worst_lyapunov_margin)},
                      {"impulse_time", opt(m.impulse_time)},
                      {"recovery_time", opt(m.recovery_time)},
                      {"duration", m.duration}};
  return j.dump(2);
}

MetricsReport metrics_from_json(const std::string& text)
{
  const auto j = nlohmann::json::parse(text);
  MetricsReport m;
  m.scenario = j.value("scenario", "");
  m.kind = j.value("kind", "");
  m.controller = j.value("controller", "");
  m.seed = j.value("seed", std::uint64_t{0});
  m.position_rmse = j.value("position_rmse", 0.0);
  m.rotation_rmse = j.value("rotation_rmse", 0.0);
  m.samples = j.value("samples", 0);
  m.diverged = j.value("diverged", false);
  m.divergence_time = opt_double(j, "divergence_time");
  m.saturation_duty = j.value("saturation_duty", 0.0);
  m.worst_lyapunov_margin = opt_double(j, "worst_lyapunov_margin");
  m.impulse_time = opt_double(j, "impulse_time");
  m.recovery_time = opt_double(j, "recovery_time");
  m.duration = j.value("duration", 0.0);
  return m;
}

MetricsReport read_metrics(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return metrics_from_json(ss.str());
}

}  // namespace omnitilt
