#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "omnitilt/geometry.hpp"

namespace omnitilt {

struct TelemetryRow {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 omega = Vec3::Zero();
  VecX f;
  VecX theta;
  VecX u_c;  // interleaved (f_c, theta_c)
  Vec6 mu = Vec6::Zero();
  Vec6 mu_d = Vec6::Zero();
  Vec6 e_mu = Vec6::Zero();
  double V = 0.0;
  bool sat = false;
};

std::vector<std::string> telemetry_columns(int rotors);

/// CSV writer: a comment line, a header row, then one row per tick printed
/// with %.17g.
class TelemetryWriter {
 public:
  TelemetryWriter(const std::filesystem::path& path, int rotors);

  void write(const TelemetryRow& row);
  void flush() { out_.flush(); }
  int rotors() const { return rotors_; }

 private:
  std::ofstream out_;
  int rotors_;
};

std::vector<TelemetryRow> read_telemetry(const std::filesystem::path& path);

}  // namespace omnitilt
