#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path& root() {
  static const fs::path p = [] {
    const fs::path d = fs::temp_directory_path() / "facetproc_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string("'") + FACETPROC_CLI + "' " + args + " >" +
                          (root() / "stdout.txt").string() + " 2>" + (root() / "stderr.txt").string();
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::string out(const std::string& name) { return " --out '" + (root() / name).string() + "'"; }

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run("") == 1);
  CHECK(run("pi --bogus 1") == 1);
  CHECK(run("pi --d 2 --nu 0,1,2" + out("bad")) == 1);
  CHECK(run("pi --format xml" + out("bad")) == 1);
  CHECK(run("--version") == 0);
}

TEST_CASE("pi rows sum to one") {
  REQUIRE(run("pi --d 2 --a 4 --nu -1" + out("pi")) == 0);
  const auto j = load(root() / "pi" / "pi.json");
  bool row_sum = false;
  for (const auto& v : j["verdicts"])
    if (v["name"] == "row_sum") row_sum = v["pass"].get<bool>();
  CHECK(row_sum);
  CHECK(fs::exists(root() / "pi" / "pi.csv"));
}

TEST_CASE("simulate is deterministic given the seed") {
  REQUIRE(run("simulate --d 3 --a 4 --reps 20 --seed 11" + out("s1")) == 0);
  REQUIRE(run("simulate --d 3 --a 4 --reps 20 --seed 11" + out("s2")) == 0);
  REQUIRE(run("simulate --d 3 --a 4 --reps 20 --seed 12" + out("s3")) == 0);
  const std::string a = slurp(root() / "s1" / "simulate.csv");
  CHECK_FALSE(a.empty());
  CHECK(a == slurp(root() / "s2" / "simulate.csv"));
  CHECK(a != slurp(root() / "s3" / "simulate.csv"));
  CHECK(load(root() / "s1" / "simulate.json")["rows"].size() == 20);
}

TEST_CASE("rho estimates approach one half") {
  REQUIRE(run("rho --d 2 --c 2 --k 1 --a-grid 5,20,80 --format csv" + out("rho")) == 0);
  std::istringstream in(slurp(root() / "rho" / "rho.csv"));
  std::string line;
  std::getline(in, line);  // comment
  std::getline(in, line);  // header
  CHECK(line.substr(line.rfind(',') + 1) == "estimate");
  double prev = 1.0;
  int n = 0;
  while (std::getline(in, line)) {
    const double est = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(std::abs(est - 0.5) < prev);
    prev = std::abs(est - 0.5);
    ++n;
  }
  CHECK(n == 3);
  CHECK(prev < 0.01);
}

TEST_CASE("config file and flag precedence") {
  const fs::path cfg = root() / "run.cfg";
  std::ofstream(cfg) << "# comment\nd = 3\nreps = 5\nseed = 2\n";
  REQUIRE(run("simulate --config '" + cfg.string() + "' --reps 7" + out("cfg")) == 0);
  const auto j = load(root() / "cfg" / "simulate.json");
  CHECK(j["rows"].size() == 7);
  CHECK(j["config"]["d"] == 3);
  std::ofstream(cfg) << "nonsense = 1\n";
  CHECK(run("simulate --reps 1 --config '" + cfg.string() + "'" + out("cfg2")) == 1);
}

TEST_CASE("output directory from the environment") {
  const fs::path dir = root() / "envout";
  REQUIRE(run("verify-identity", "FACETPROC_OUTPUT_DIR='" + dir.string() + "'") == 0);
  CHECK(fs::exists(dir / "product_identity.json"));
}

TEST_CASE("failed verdict exits 2") {
  CHECK(run("clt --no-control --d 2 --c 2 --a-grid 5 --samples 200 --min-ess 1e7 --outer 2000" + out("clt")) == 2);
  CHECK(fs::exists(root() / "clt" / "clt.json"));
}
