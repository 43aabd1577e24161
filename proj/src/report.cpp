#include "facetproc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace facetproc {

std::string artifact_version() { return FACETPROC_VERSION; }

Verdict& ExperimentReport::add_verdict(std::string name, bool pass, std::string rule, bool informational) {
  verdicts.push_back({std::move(name), pass, std::move(rule), informational});
  return verdicts.back();
}

bool ExperimentReport::passed() const {
  if (!controls_passed) return false;
  for (const Verdict& v : verdicts)
    if (!v.informational && !v.pass) return false;
  return true;
}

Json ExperimentReport::to_json() const {
  Json j;
  j["experiment"] = id;
  j["version"] = artifact_version();
  j["seed"] = seed;
  j["config"] = config;
  j["controls_passed"] = controls_passed;
  j["passed"] = passed();
  Json vs = Json::array();
  for (const Verdict& v : verdicts)
    vs.push_back({{"name", v.name}, {"pass", v.pass}, {"rule", v.rule}, {"informational", v.informational}});
  j["verdicts"] = vs;
  j["rows"] = rows;
  j["warnings"] = warnings;
  return j;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number()) return format_number(v.get<double>());
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return s;
}

}  // namespace

std::string ExperimentReport::to_csv() const {
  std::vector<std::string> cols;
  for (const Json& r : rows)
    for (auto it = r.begin(); it != r.end(); ++it)
      if (std::find(cols.begin(), cols.end(), it.key()) == cols.end()) cols.push_back(it.key());
  std::ostringstream out;
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const Json& r : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ",";
      if (r.contains(cols[i])) out << csv_cell(r[cols[i]]);
    }
    out << "\n";
  }
  return out.str();
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir, bool json, bool csv) {
  std::filesystem::create_directories(dir);
  if (json) {
    std::ofstream f(dir / (report.id + ".json"));
    if (!f) throw std::runtime_error("cannot write " + (dir / (report.id + ".json")).string());
    f << report.to_json().dump(2) << "\n";
  }
  if (csv) {
    std::ofstream f(dir / (report.id + ".csv"));
    if (!f) throw std::runtime_error("cannot write " + (dir / (report.id + ".csv")).string());
    f << "# " << report.id << " version " << artifact_version() << " config " << report.config.dump() << "\n";
    f << report.to_csv();
  }
}

}  // namespace facetproc
