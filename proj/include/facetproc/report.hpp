#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace facetproc {

using Json = nlohmann::ordered_json;

std::string artifact_version();

struct Verdict {
  std::string name;
  bool pass = false;
  /// Pre-registered rule, including its thresholds.
  std::string rule;
  /// Reported only; does not enter ExperimentReport::passed().
  bool informational = false;
};

/// One experiment: resolved configuration, one row per grid point, verdicts.
struct ExperimentReport {
  std::string id;
  std::uint64_t seed = 0;
  Json config = Json::object();
  std::vector<Json> rows;
  std::vector<Verdict> verdicts;
  std::vector<std::string> warnings;
  /// False when a Poisson/degenerate control failed; the remaining verdicts are then moot.
  bool controls_passed = true;

  void add_row(Json row) { rows.push_back(std::move(row)); }
  Verdict& add_verdict(std::string name, bool pass, std::string rule, bool informational = false);
  bool passed() const;

  Json to_json() const;
  /// Flat table: union of row keys in first-seen order.
  std::string to_csv() const;
};

/// Writes <dir>/<id>.json and/or <dir>/<id>.csv.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir, bool json, bool csv);

/// Shortest round-trip decimal form.
std::string format_number(double v);

}  // namespace facetproc
