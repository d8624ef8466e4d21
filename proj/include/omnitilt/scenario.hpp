#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "omnitilt/controller.hpp"
#include "omnitilt/dynamics.hpp"
#include "omnitilt/estimation.hpp"
#include "omnitilt/reference.hpp"
#include "omnitilt/stability.hpp"
#include "omnitilt/vehicle_model.hpp"

namespace omnitilt {

enum class MeasurementMode { estimated, perfect };

struct InitialCondition {
  Vec3 position_offset = Vec3::Zero();  // added to the reference position at t = 0
  Vec3 attitude_axis = Vec3::UnitX();
  double attitude_deg = 0.0;            // rotation of R(0) relative to R_d(0)
  Vec3 velocity = Vec3::Zero();
  Vec3 e_pi = Vec3::Zero();
  Vec3 e_ri = Vec3::Zero();
};

struct EstimationConfig {
  double cutoff_hz = 20.0;
  ImuNoise noise;
  bool differentiate_gyro = true;
};

struct Scenario {
  std::string name = "scenario";
  ReferenceSpec reference;
  std::string controller = "proposed";
  VehicleParams vehicle = VehicleParams::default_quad();  // time constants are the controller's nominal
  SimConfig sim;
  Gains gains;
  DisturbanceProfile disturbance;
  MeasurementMode measurement = MeasurementMode::estimated;
  MuDotMode mu_dot_mode = MuDotMode::analytic;
  double numeric_mu_dot_smoothing = 0.01;
  EstimationConfig estimation;
  InitialCondition initial;
  double settle_time = 5.0;
  double metric_rate = 200.0;
  double psi2 = 1.9;
  std::optional<UncertaintyBand> band;
  double recovery_threshold = 0.05;

  void validate() const;
};

/// Reads a scenario from TOML. Missing keys keep their defaults.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& toml_text);

struct CertificationRequest {
  Gains gains;
  VehicleParams vehicle = VehicleParams::default_quad();
  Vec3 delta_p = Vec3::Zero();
  Vec3 delta_r = Vec3::Zero();
  double psi2 = 1.9;
  std::optional<UncertaintyBand> band;
  RobustnessOptions options;
};

CertificationRequest load_certification(const std::filesystem::path& path);
CertificationRequest parse_certification(const std::string& toml_text);

}  // namespace omnitilt
