#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "omnitilt/reference.hpp"
#include "omnitilt/telemetry.hpp"

namespace omnitilt {

constexpr double kDivergenceDistance = 5.0;  // [m]

struct MetricsReport {
  std::string scenario;
  std::string kind;
  std::string controller;
  std::uint64_t seed = 0;
  double position_rmse = 0.0;  // [m]
  double rotation_rmse = 0.0;  // [rad]
  int samples = 0;
  bool diverged = false;
  std::optional<double> divergence_time;
  double saturation_duty = 0.0;
  std::optional<double> worst_lyapunov_margin;
  std::optional<double> impulse_time;
  std::optional<double> recovery_time;
  double duration = 0.0;
};

/// True for ticks on the metric grid (rate in Hz) at or after the settle time.
bool is_metric_sample(double t, double settle_time, double rate_hz);

/// Component-wise RMSE of e_p and e_R accumulated while the run progresses.
class OnlineMetrics {
 public:
  OnlineMetrics(double settle_time, double rate_hz) : settle_(settle_time), rate_(rate_hz) {}

  void add(double t, const Vec3& e_p, const Vec3& e_R);
  double position_rmse() const;
  double rotation_rmse() const;
  int samples() const { return count_; }

 private:
  double settle_;
  double rate_;
  Vec3 sum_p_ = Vec3::Zero();
  Vec3 sum_r_ = Vec3::Zero();
  int count_ = 0;
};

/// Independent pass over telemetry: recomputes the errors from logged states.
MetricsReport metrics_from_telemetry(const std::vector<TelemetryRow>& rows,
                                     const ReferenceGenerator& reference, double settle_time,
                                     double rate_hz);

/// Time after `t_impulse` until |e_R| stays below `threshold` for the rest of
/// the record. Empty when it never settles.
std::optional<double> recovery_time(const std::vector<double>& t,
                                    const std::vector<double>& e_r_norm, double t_impulse,
                                    double threshold = 0.05);

std::string metrics_to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const std::string& text);
MetricsReport read_metrics(const std::filesystem::path& path);

}  // namespace omnitilt
