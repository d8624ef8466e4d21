#include "omnitilt/compare.hpp"

#include <algorithm>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

namespace omnitilt {

namespace {

std::string fmt(const char* spec, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string cell_rmse(const std::optional<MetricsReport>& m, bool position)
{
  if (!m) return "-";
  if (m->diverged) {
    return m->divergence_time ? "x (" + fmt("%.2f", *m->divergence_time) + " s)" : "x";
  }
  return fmt("%.4f", position ? m->position_rmse : m->rotation_rmse);
}

std::string cell_recovery(const std::optional<MetricsReport>& m)
{
  if (!m || !m->impulse_time) return "-";
  if (m->diverged) return "x";
  return m->recovery_time ? fmt("%.3f", *m->recovery_time) : "never";
}

nlohmann::json entry_json(const std::optional<MetricsReport>& m)
{
  if (!m) return nullptr;
  nlohmann::json j;
  j["position_rmse"] = m->position_rmse;
  j["rotation_rmse"] = m->rotation_rmse;
  j["diverged"] = m->diverged;
  j["divergence_time"] = m->divergence_time ? nlohmann::json(*m->divergence_time) : nlohmann::json();
  j["saturation_duty"] = m->saturation_duty;
  j["recovery_time"] = m->recovery_time ? nlohmann::json(*m->recovery_time) : nlohmann::json();
  return j;
}

}  // namespace

Comparison compare_controllers(const std::vector<MetricsReport>& reports)
{
  Comparison c;
  for (const MetricsReport& m : reports) {
    auto it = std::find_if(c.rows.begin(), c.rows.end(), [&](const ComparisonRow& r) {
      return r.scenario == m.scenario && r.seed == m.seed;
    });
    if (it == c.rows.end()) {
      c.rows.push_back({m.scenario, m.seed, std::nullopt, std::nullopt, false});
      it = c.rows.end() - 1;
    }
    if (m.controller == "baseline") {
      it->baseline = m;
    } else {
      it->proposed = m;
    }
    it->has_recovery = it->has_recovery || m.impulse_time.has_value();
  }
  return c;
}

std::vector<MetricsReport> collect_metrics(const std::vector<std::filesystem::path>& dirs)
{
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const fs::path& d : dirs) {
    if (fs::is_regular_file(d)) {
      files.push_back(d);
      continue;
    }
    if (fs::exists(d / "metrics.json")) files.push_back(d / "metrics.json");
    if (!fs::is_directory(d)) continue;
    std::vector<fs::path> sub;
    for (const auto& e : fs::directory_iterator(d)) {
      if (e.is_directory() && fs::exists(e.path() / "metrics.json")) {
        sub.push_back(e.path() / "metrics.json");
      }
    }
    std::sort(sub.begin(), sub.end());
    files.insert(files.end(), sub.begin(), sub.end());
  }
  std::vector<MetricsReport> out;
  for (const fs::path& f : files) out.push_back(read_metrics(f));
  return out;
}

std::string comparison_to_text(const Comparison& c)
{
  const bool recovery = std::any_of(c.rows.begin(), c.rows.end(),
                                    [](const ComparisonRow& r) { return r.has_recovery; });
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %6s | %-16s %-16s | %-16s %-16s", "scenario", "seed",
                "pos proposed", "pos baseline", "rot proposed", "rot baseline");
  os << line;
  if (recovery) {
    std::snprintf(line, sizeof(line), " | %-14s %-14s", "recovery prop", "recovery base");
    os << line;
  }
  os << "\n";
  for (const ComparisonRow& r : c.rows) {
    std::snprintf(line, sizeof(line), "%-28s %6llu | %-16s %-16s | %-16s %-16s", r.scenario.c_str(),
                  static_cast<unsigned long long>(r.seed), cell_rmse(r.proposed, true).c_str(),
                  cell_rmse(r.baseline, true).c_str(), cell_rmse(r.proposed, false).c_str(),
                  cell_rmse(r.baseline, false).c_str());
    os << line;
    if (recovery) {
      std::snprintf(line, sizeof(line), " | %-14s %-14s", cell_recovery(r.proposed).c_str(),
                    cell_recovery(r.baseline).c_str());
      os << line;
    }
    os << "\n";
  }
  return os.str();
}

std::string comparison_to_json(const Comparison& c)
{
  nlohmann::json rows = nlohmann::json::array();
  for (const ComparisonRow& r : c.rows) {
    nlohmann::json j;
    j["scenario"] = r.scenario;
    j["seed"] = r.seed;
    j["proposed"] = entry_json(r.proposed);
    j["baseline"] = entry_json(r.baseline);
    rows.push_back(j);
  }
  return nlohmann::json{{"rows", rows}}.dump(2);
}

}  // namespace omnitilt
