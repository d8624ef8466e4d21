#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "omnitilt/metrics.hpp"

namespace omnitilt {

/// One scenario with whatever controllers were found for it.
struct ComparisonRow {
  std::string scenario;
  std::uint64_t seed = 0;
  std::optional<MetricsReport> proposed;
  std::optional<MetricsReport> baseline;
  bool has_recovery = false;  // any entry saw a tether impulse
};

struct Comparison {
  std::vector<ComparisonRow> rows;
};

/// Groups reports by (scenario, seed). Order follows first appearance.
Comparison compare_controllers(const std::vector<MetricsReport>& reports);

/// Collects metrics.json files found directly in, or one level below, each
/// directory.
std::vector<MetricsReport> collect_metrics(const std::vector<std::filesystem::path>& dirs);

std::string comparison_to_text(const Comparison& c);
std::string comparison_to_json(const Comparison& c);

}  // namespace omnitilt
