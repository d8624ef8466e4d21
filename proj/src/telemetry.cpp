#include "omnitilt/telemetry.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace omnitilt {

std::vector<std::string> telemetry_columns(int rotors)
{
  std::vector<std::string> c{"t"};
  for (const char* a : {"x", "y", "z"}) c.push_back(std::string("p_") + a);
  for (const char* a : {"x", "y", "z"}) c.push_back(std::string("v_") + a);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c.push_back("R_" + std::to_string(i) + std::to_string(j));
  for (const char* a : {"x", "y", "z"}) c.push_back(std::string("omega_") + a);
  for (int i = 1; i <= rotors; ++i) c.push_back("f_" + std::to_string(i));
  for (int i = 1; i <= rotors; ++i) c.push_back("theta_" + std::to_string(i));
  for (int i = 1; i <= rotors; ++i) {
    c.push_back("uc_f_" + std::to_string(i));
    c.push_back("uc_theta_" + std::to_string(i));
  }
  for (const std::string prefix : {"mu_", "mu_d_", "e_mu_"}) {
    for (const char* a : {"fx", "fy", "fz", "tx", "ty", "tz"}) c.push_back(prefix + a);
  }
  c.push_back("V");
  c.push_back("sat_flag");
  return c;
}

TelemetryWriter::TelemetryWriter(const std::filesystem::path& path, int rotors)
    : out_(path), rotors_(rotors)
{
  if (!out_) {
    throw std::runtime_error("cannot open telemetry file " + path.string());
  }
  out_ << "# omnitilt telemetry: t, p(3), v(3), R(9 row-major), omega(3), f(" << rotors
       << "), theta(" << rotors << "), u_c(" << 2 * rotors
       << " interleaved f_c/theta_c), mu(6), mu_d(6), e_mu(6), V, sat_flag; SI units, body-frame "
          "wrench\n";
  const auto cols = telemetry_columns(rotors);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out_ << (i ? "," : "") << cols[i];
  }
  out_ << "\n";
}

void TelemetryWriter::write(const TelemetryRow& r)
{
  char buf[32];
  bool first = true;
  const auto put = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    if (!first) out_ << ',';
    out_ << buf;
    first = false;
  };
  put(r.t);
  for (int i = 0; i < 3; ++i) put(r.p(i));
  for (int i = 0; i < 3; ++i) put(r.v(i));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) put(r.R(i, j));
  for (int i = 0; i < 3; ++i) put(r.omega(i));
  for (int i = 0; i < rotors_; ++i) put(r.f(i));
  for (int i = 0; i < rotors_; ++i) put(r.theta(i));
  for (int i = 0; i < 2 * rotors_; ++i) put(r.u_c(i));
  for (int i = 0; i < 6; ++i) put(r.mu(i));
  for (int i = 0; i < 6; ++i) put(r.mu_d(i));
  for (int i = 0; i < 6; ++i) put(r.e_mu(i));
  put(r.V);
  put(r.sat ? 1.0 : 0.0);
  out_ << '\n';
}

std::vector<TelemetryRow> read_telemetry(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open telemetry file " + path.string());
  }
  std::string line;
  int rotors = -1;
  std::vector<TelemetryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') {
      continue;
    }
    if (rotors < 0) {
      std::size_t count = 1;
      for (char ch : line) count += ch == ',' ? 1 : 0;
      // 1 + 3 + 3 + 9 + 3 + 18 + 1 + 1 fixed columns plus 4 per rotor
      rotors = static_cast<int>((count - 39) / 4);
      if (telemetry_columns(rotors).size() != count) {
        throw std::runtime_error("telemetry header has unexpected column count");
      }
      continue;
    }
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      v.push_back(std::stod(cell));
    }
    if (v.size() != telemetry_columns(rotors).size()) {
      throw std::runtime_error("telemetry row has unexpected column count");
    }
    std::size_t k = 0;
    TelemetryRow r;
    r.t = v[k++];
    for (int i = 0; i < 3; ++i) r.p(i) = v[k++];
    for (int i = 0; i < 3; ++i) r.v(i) = v[k++];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.R(i, j) = v[k++];
    for (int i = 0; i < 3; ++i) r.omega(i) = v[k++];
    r.f.resize(rotors);
    r.theta.resize(rotors);
    r.u_c.resize(2 * rotors);
    for (int i = 0; i < rotors; ++i) r.f(i) = v[k++];
    for (int i = 0; i < rotors; ++i) r.theta(i) = v[k++];
    for (int i = 0; i < 2 * rotors; ++i) r.u_c(i) = v[k++];
    for (int i = 0; i < 6; ++i) r.mu(i) = v[k++];
    for (int i = 0; i < 6; ++i) r.mu_d(i) = v[k++];
    for (int i = 0; i < 6; ++i) r.e_mu(i) = v[k++];
    r.V = v[k++];
    r.sat = v[k++] != 0.0;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace omnitilt
