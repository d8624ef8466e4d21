#pragma once

#include <string>

#include "omnitilt/controller.hpp"

namespace omnitilt {

enum class ScenarioKind { lemniscate, roll_oscillation, tether_drop, hover_step, custom };

ScenarioKind parse_scenario_kind(const std::string& s);
std::string to_string(ScenarioKind k);

struct LemniscateSpec {
  double speed = 0.8;  // mean path speed [m/s]
  double ax = 0.4;
  double ay = 0.3;
  double z = 1.2;
};

struct RollSpec {
  double amplitude_deg = 50.0;
  double frequency = 0.4;  // [Hz]
  Vec3 position = Vec3(0.0, 0.0, 1.2);
};

/// Lateral translation with smooth velocity ramps, cruising at `speed`.
struct TranslationSpec {
  Vec3 start = Vec3(0.0, 0.0, 1.2);
  double distance = 1.0;
  double speed = 0.4;
  double start_time = 2.0;
  double ramp_time = 0.5;
};

struct SetpointSpec {
  Vec3 position = Vec3(0.0, 0.0, 1.2);
  Vec3 attitude_rpy_deg = Vec3::Zero();
};

struct ReferenceSpec {
  ScenarioKind kind = ScenarioKind::hover_step;
  LemniscateSpec lemniscate;
  RollSpec roll;
  TranslationSpec translation;
  SetpointSpec setpoint;
};

/// Length of one period of (ax sin s, ay sin 2s) for s in [0, 2 pi].
double lemniscate_path_length(double ax, double ay);

/// Angular rate whose mean path speed over one period equals `speed`.
/// Throws std::invalid_argument when no positive rate reaches it.
double lemniscate_rate_for_speed(double speed, double ax, double ay);

/// Precomputes scenario constants and evaluates the reference at time t.
class ReferenceGenerator {
 public:
  explicit ReferenceGenerator(ReferenceSpec spec);

  Reference operator()(double t) const;
  const ReferenceSpec& spec() const { return spec_; }
  double lemniscate_rate() const { return omega_; }

 private:
  ReferenceSpec spec_;
  double omega_ = 0.0;
  double cruise_time_ = 0.0;
};

}  // namespace omnitilt
