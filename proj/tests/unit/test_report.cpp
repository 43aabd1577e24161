#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "facetproc/report.hpp"

using namespace facetproc;

namespace {

ExperimentReport sample_report() {
  ExperimentReport r;
  r.id = "sample";
  r.seed = 42;
  r.config = {{"a", 5.0}};
  r.add_row({{"a", 5.0}, {"n", 3}});
  r.add_row({{"n", 4}, {"flag", true}, {"note", "x,\"y\""}});
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("format_number round-trips") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(-1.5e-300) == "-1.5e-300");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
  for (const double v : {1.0 / 3.0, 2.0 / 7.0, 1e300, 6.02214076e23})
    CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
}

TEST_CASE("csv uses the union of row keys") {
  const std::string csv = sample_report().to_csv();
  CHECK(csv == "a,n,flag,note\n5,3,,\n,4,true,\"x,\"\"y\"\"\"\n");
}

TEST_CASE("passed ignores informational verdicts") {
  ExperimentReport r = sample_report();
  r.add_verdict("ok", true, "rule");
  CHECK(r.passed());
  r.add_verdict("info", false, "rule", true);
  CHECK(r.passed());
  r.add_verdict("bad", false, "rule");
  CHECK_FALSE(r.passed());
  ExperimentReport c = sample_report();
  c.controls_passed = false;
  CHECK_FALSE(c.passed());
}

TEST_CASE("json layout") {
  ExperimentReport r = sample_report();
  r.add_verdict("ok", true, "rule");
  r.warnings.push_back("w");
  const Json j = r.to_json();
  CHECK(j["experiment"] == "sample");
  CHECK(j["seed"] == 42);
  CHECK(j["version"] == artifact_version());
  CHECK(j["passed"] == true);
  CHECK(j["rows"].size() == 2);
  CHECK(j["verdicts"][0]["name"] == "ok");
  CHECK(j["warnings"][0] == "w");
}

TEST_CASE("write_report") {
  const auto dir = std::filesystem::temp_directory_path() / "facetproc_test_report";
  std::filesystem::remove_all(dir);
  const ExperimentReport r = sample_report();
  write_report(r, dir, true, true);
  const std::string csv = slurp(dir / "sample.csv");
  CHECK(csv.rfind("# sample version ", 0) == 0);
  CHECK(csv.find(r.to_csv()) != std::string::npos);
  CHECK(Json::parse(slurp(dir / "sample.json")) == r.to_json());
  std::filesystem::remove_all(dir);
  write_report(r, dir, false, true);
  CHECK_FALSE(std::filesystem::exists(dir / "sample.json"));
  CHECK(std::filesystem::exists(dir / "sample.csv"));
  std::filesystem::remove_all(dir);
}
