#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "facetproc/analytic.hpp"
#include "facetproc/correlation.hpp"
#include "facetproc/mcmc.hpp"
#include "facetproc/model.hpp"
#include "facetproc/parallel.hpp"
#include "facetproc/partitions.hpp"
#include "facetproc/report.hpp"
#include "facetproc/stats.hpp"
#include "facetproc/ustats.hpp"
#include "facetproc/verify.hpp"

using namespace facetproc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerdict = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
  UsageError(const std::string& flag, const std::string& msg) : std::runtime_error(flag + ": " + msg) {}
};

/// Every flag any subcommand may take; each subcommand registers its subset.
struct RunConfig {
  int d = 2;
  double b = 1.0;
  double a = 5.0;
  std::string a_grid;
  std::string nu;
  int c = 0;
  double nu_c = -1.0;
  int k = 1;
  int q = 0;
  int s = 0;
  std::string chi = "constant";
  std::int64_t reps = 0;
  std::int64_t samples = 0;
  std::int64_t burn_in = -1;
  std::int64_t thin = 0;
  std::string sampler = "auto";
  std::string base = "full";
  std::string m;
  std::int64_t outer = 20000;
  std::int64_t inner = 64;
  std::int64_t clt_outer = 200000;
  std::int64_t node_reps = 256;
  double z = 4.0;
  double min_ess = 4000.0;
  bool no_control = false;
  bool informational_ks = false;
  bool patterns = false;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "both";
  bool print = false;
  int verbose = 0;
  unsigned threads = 0;
  std::string config_file;
};

std::vector<double> parse_doubles(const std::string& flag, const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag, "not a number: '" + item + "'");
    }
  }
  if (v.empty()) throw UsageError(flag, "empty list");
  return v;
}

std::vector<int> parse_ints(const std::string& flag, const std::string& text) {
  std::vector<int> v;
  for (const double x : parse_doubles(flag, text)) {
    if (x != std::floor(x) || x < 0) throw UsageError(flag, "expected non-negative integers");
    v.push_back(static_cast<int>(x));
  }
  return v;
}

Json to_json_array(const std::vector<double>& v) { return Json(v); }

// ---- model flags -----------------------------------------------------------

void add_model_flags(CLI::App* app, RunConfig& rc, bool grid) {
  app->add_option("--d", rc.d, "dimension");
  app->add_option("--b", rc.b, "facet half-side / window side");
  app->add_option("--a", rc.a, "intensity parameter");
  if (grid) app->add_option("--a-grid", rc.a_grid, "comma list of a values (overrides --a)");
  app->add_option("--nu", rc.nu, "comma list nu_1..nu_d");
  app->add_option("--c", rc.c, "submodel order (only nu_c active)");
  app->add_option("--nu-c", rc.nu_c, "submodel parameter nu_c < 0");
  app->add_option("--chi", rc.chi, "centre intensity: constant | first_coordinate");
}

void add_seed_flags(CLI::App* app, RunConfig& rc) { app->add_option("--seed", rc.seed, "master seed"); }

std::vector<double> a_values(const RunConfig& rc) {
  if (!rc.a_grid.empty()) return parse_doubles("--a-grid", rc.a_grid);
  return {rc.a};
}

void check_common(const RunConfig& rc) {
  if (rc.d < 1 || rc.d > kMaxDim) throw UsageError("--d", "must be in [1, " + std::to_string(kMaxDim) + "]");
  if (!(rc.b > 0.0) || !std::isfinite(rc.b)) throw UsageError("--b", "must be positive");
  for (const double a : a_values(rc))
    if (!(a > 0.0) || !std::isfinite(a)) throw UsageError(rc.a_grid.empty() ? "--a" : "--a-grid", "must be positive");
  if (rc.chi != "constant" && rc.chi != "first_coordinate")
    throw UsageError("--chi", "expected constant or first_coordinate");
}

std::vector<double> nu_vector(const RunConfig& rc) {
  if (!rc.nu.empty() && rc.c != 0) throw UsageError("--nu", "give either --nu or --c/--nu-c");
  std::vector<double> nu(static_cast<std::size_t>(rc.d), 0.0);
  if (!rc.nu.empty()) {
    nu = parse_doubles("--nu", rc.nu);
    if (static_cast<int>(nu.size()) != rc.d) throw UsageError("--nu", "needs exactly d = " + std::to_string(rc.d) + " entries");
    for (std::size_t i = 1; i < nu.size(); ++i)
      if (nu[i] > 0.0) throw UsageError("--nu", "nu_j must be <= 0 for j >= 2");
  } else if (rc.c != 0) {
    if (rc.c < 2 || rc.c > rc.d) throw UsageError("--c", "must be in [2, d]");
    if (!(rc.nu_c < 0.0)) throw UsageError("--nu-c", "must be negative");
    nu[static_cast<std::size_t>(rc.c - 1)] = rc.nu_c;
  }
  return nu;
}

ModelConfig model_for(const RunConfig& rc, double a) {
  ModelConfig cfg = make_config(rc.d, rc.b, a, nu_vector(rc));
  if (rc.chi == "first_coordinate") cfg.chi = IntensityFunction::first_coordinate(rc.d, rc.b);
  cfg.validate();
  return cfg;
}

Json model_json(const RunConfig& rc, const std::vector<double>& as) {
  return {{"d", rc.d}, {"b", rc.b}, {"a", to_json_array(as)}, {"nu", nu_vector(rc)}, {"chi", rc.chi}};
}

// ---- subcommands -----------------------------------------------------------

ExperimentReport run_simulate(const RunConfig& rc) {
  check_common(rc);
  if (rc.reps < 1) throw UsageError("--reps", "must be >= 1");
  if (rc.sampler != "auto" && rc.sampler != "poisson" && rc.sampler != "mcmc")
    throw UsageError("--sampler", "expected auto, poisson or mcmc");
  const ModelConfig cfg = model_for(rc, rc.a);
  const bool poisson_law = std::all_of(cfg.nu.begin(), cfg.nu.end(), [](double v) { return v == 0.0; });
  if (rc.sampler == "poisson" && !poisson_law) throw UsageError("--sampler", "poisson needs nu == 0");
  const bool iid = rc.sampler == "poisson" || (rc.sampler == "auto" && poisson_law);

  ExperimentReport r;
  r.id = "simulate";
  r.seed = rc.seed;
  r.config = model_json(rc, {rc.a});
  r.config["reps"] = rc.reps;
  r.config["sampler"] = iid ? "poisson" : "mcmc";

  std::vector<FacetPattern> pats(static_cast<std::size_t>(rc.reps));
  if (iid) {
    default_pool().parallel_for(pats.size(), [&](std::size_t i) {
      Rng rng(derive_seed(rc.seed, i));
      pats[i] = sample_poisson(rng, cfg);
    });
  } else {
    ChainConfig ch = default_chain_config(cfg, rc.reps, rc.seed);
    if (rc.burn_in >= 0) ch.burn_in = rc.burn_in;
    if (rc.thin > 0) ch.thin = rc.thin;
    ch.n_steps = ch.burn_in + rc.reps * ch.thin;
    ch.record_patterns = true;
    r.config["burn_in"] = ch.burn_in;
    r.config["thin"] = ch.thin;
    r.config["n_steps"] = ch.n_steps;
    const ChainOutput out = run_chain(cfg, ch);
    pats = out.patterns;
    for (const auto& w : out.warnings) r.warnings.push_back(w);
    for (int m = 0; m < 3; ++m) {
      const char* names[] = {"birth", "death", "move"};
      r.config["acceptance_" + std::string(names[m])] = out.acceptance.rate(static_cast<MoveKind>(m));
    }
  }
  r.config["patterns"] = rc.patterns;
  for (std::size_t i = 0; i < pats.size(); ++i) {
    const OrientationCounts th = orientation_counts(pats[i], rc.d);
    const UStatVector G = compute_G(pats[i], cfg);
    Json row = {{"rep", i}, {"facets", pats[i].size()}};
    for (int t = 0; t < rc.d; ++t) row["theta_" + std::to_string(t + 1)] = th[t];
    for (int j = 1; j <= rc.d; ++j) row["G_" + std::to_string(j)] = G.G(j);
    if (rc.patterns) {
      Json fs = Json::array();
      for (const Facet& f : pats[i])
        fs.push_back({{"axis", f.axis}, {"center", std::vector<double>(f.center.begin(), f.center.begin() + rc.d)}});
      row["pattern"] = fs.dump();
    }
    r.add_row(std::move(row));
  }
  return r;
}

ExperimentReport run_pi(const RunConfig& rc) {
  check_common(rc);
  if (rc.d < 2) throw UsageError("--d", "pi needs d >= 2");
  const std::vector<double> as = a_values(rc);
  // A single --nu value is nu_d, the only parameter pi depends on.
  RunConfig full = rc;
  if (!rc.nu.empty() && parse_doubles("--nu", rc.nu).size() == 1 && rc.d > 1) {
    full.nu.clear();
    for (int i = 1; i < rc.d; ++i) full.nu += "0,";
    full.nu += rc.nu;
  }
  ExperimentReport r;
  r.id = "pi";
  r.seed = rc.seed;
  r.config = model_json(full, as);
  const double nu_d = nu_vector(full)[static_cast<std::size_t>(rc.d - 1)];
  if (!(nu_d < 0.0)) throw UsageError("--nu", "pi needs nu_d < 0");
  bool sums_ok = true;
  for (const double a : as) {
    const ModelConfig cfg = model_for(full, a);
    const double A = pi_rate(cfg);
    const PiDistribution pi(rc.d, A, nu_d);
    double total = 0.0;
    if (as.size() == 1) {
      for (std::size_t i = 0; i < pi.cells(); ++i) {
        const OrientationCounts k = pi.counts_of(i);
        Json row = {{"kind", "cell"}, {"a", a}};
        for (int t = 0; t < rc.d; ++t) row["k_" + std::to_string(t + 1)] = k[t];
        row["pmf"] = pi.pmf_index(i);
        r.add_row(std::move(row));
      }
    }
    for (std::size_t i = 0; i < pi.cells(); ++i) total += pi.pmf_index(i);
    const bool ok = std::abs(total - 1.0) <= pi.tail_bound() + 1e-12;
    sums_ok = sums_ok && ok;
    r.add_row({{"kind", "summary"}, {"a", a}, {"A", A}, {"K", pi.K()}, {"row_sum", total}, {"tail_bound", pi.tail_bound()},
               {"interior_mass", pi.interior_mass()}, {"product_moment", pi.product_moment()},
               {"product_moment_tail", pi.product_moment_tail()}});
  }
  r.add_verdict("row_sum", sums_ok, "|sum of pmf - 1| <= tail bound + 1e-12");
  return r;
}

ExperimentReport run_bsum(const RunConfig& rc) {
  check_common(rc);
  const std::vector<double> as = a_values(rc);
  const int c = rc.c == 0 ? 2 : rc.c;
  const int s = rc.s == 0 ? rc.d : rc.s;
  if (c < 2 || c > s) throw UsageError("--c", "need 2 <= c <= s");
  if (s > rc.d) throw UsageError("--s", "need s <= d");
  if (rc.q < 0 || rc.q > s) throw UsageError("--q", "need 0 <= q <= s");
  if (!(rc.nu_c < 0.0)) throw UsageError("--nu-c", "must be negative");
  ExperimentReport r;
  r.id = "bsum";
  r.seed = rc.seed;
  r.config = {{"d", rc.d}, {"b", rc.b}, {"a", to_json_array(as)}, {"c", c}, {"q", rc.q}, {"s", s}, {"nu_c", rc.nu_c}};
  const double target = binomial(s - rc.q, s - c + 1);
  for (const double a : as) {
    const double rate = pi_rate(make_config(rc.d, rc.b, a));
    const SeriesValue B = b_sum(c, rc.b, rate, rc.q, s, rc.nu_c, rc.d);
    r.add_row({{"a", a}, {"rate", rate}, {"K", B.K}, {"tail_bound", B.tail_bound}, {"target", target},
               {"abs_dev", std::abs(B.value - target)}, {"B", B.value}});
  }
  return r;
}

ExperimentReport run_rho(const RunConfig& rc) {
  check_common(rc);
  const std::vector<double> as = a_values(rc);
  const int c = rc.c == 0 ? 2 : rc.c;
  if (c < 2 || c > rc.d) throw UsageError("--c", "must be in [2, d]");
  if (rc.k < 1 || rc.k > rc.d) throw UsageError("--k", "must be in [1, d]");
  if (!(rc.nu_c < 0.0)) throw UsageError("--nu-c", "must be negative");
  if (!rc.nu.empty()) throw UsageError("--nu", "rho takes --c/--nu-c");
  const std::int64_t reps = rc.reps > 0 ? rc.reps : 40000;
  ExperimentReport r;
  r.id = "rho";
  r.seed = rc.seed;
  r.config = {{"d", rc.d}, {"b", rc.b}, {"a", to_json_array(as)}, {"c", c}, {"nu_c", rc.nu_c},
              {"k", rc.k}, {"reps", reps}, {"z", rc.z}};
  const Rational lim = rho_limit(rc.d, c, rc.k);
  for (std::size_t i = 0; i < as.size(); ++i) {
    RunConfig sub = rc;
    sub.c = c;
    const ModelConfig cfg = model_for(sub, as[i]);
    std::vector<Facet> x;
    for (int t = 0; t < rc.k; ++t) {
      std::vector<double> z(static_cast<std::size_t>(rc.d), 0.5 * rc.b);
      x.push_back(make_facet(z, t));
    }
    RhoOptions ro;
    ro.reps = reps;
    CorrelationEstimator est(cfg, c, ro);
    Rng rng(derive_seed(rc.seed, i));
    const RhoEstimate e = est.rho(x, rng);
    const RhoBounds bd = rho_bounds(c, est.rate(), rc.k, rc.d, rc.nu_c, rc.b);
    for (const auto& w : e.warnings) r.warnings.push_back("a=" + format_number(as[i]) + ": " + w);
    r.add_row({{"a", as[i]}, {"rate", est.rate()}, {"lower", bd.lower}, {"upper", bd.upper},
               {"limit", lim.value()}, {"limit_rational", std::to_string(lim.num) + "/" + std::to_string(lim.den)},
               {"stderr", e.stderr}, {"truncation_error", e.truncation_error}, {"ci_low", e.ci_low(rc.z)},
               {"ci_high", e.ci_high(rc.z)}, {"estimate", e.value}});
  }
  return r;
}

BaseMeasure base_for(const RunConfig& rc, const ModelConfig& cfg) {
  if (rc.base == "full") return BaseMeasure::full(cfg);
  if (rc.base == "restricted") {
    if (rc.c < 2) throw UsageError("--base", "restricted needs --c >= 2");
    return BaseMeasure::restricted(rc.c);
  }
  throw UsageError("--base", "expected full or restricted");
}

ExperimentReport run_cov(const RunConfig& rc) {
  check_common(rc);
  const ModelConfig cfg = model_for(rc, rc.a);
  const BaseMeasure base = base_for(rc, cfg);
  const int n = rc.base == "restricted" ? std::max(1, rc.c - 1) : rc.d;
  const int order = rc.k > 1 ? rc.k : n;
  if (order < 1 || order > rc.d) throw UsageError("--k", "matrix order must be in [1, d]");
  if (rc.outer < 1) throw UsageError("--outer", "must be >= 1");
  if (rc.inner < 1) throw UsageError("--inner", "must be >= 1");
  ExperimentReport r;
  r.id = "cov";
  r.seed = rc.seed;
  r.config = model_json(rc, {rc.a});
  r.config["base"] = rc.base;
  r.config["base_orientations"] = base.orientations;
  r.config["order"] = order;
  r.config["outer"] = rc.outer;
  r.config["inner"] = rc.inner;
  CovarianceSpec spec{rc.outer, rc.inner, rc.seed};
  const std::vector<Estimate> C = covariance_matrix(order, cfg, base, spec);
  for (int i = 1; i <= order; ++i)
    for (int j = 1; j <= order; ++j) {
      const Estimate& e = C[static_cast<std::size_t>((i - 1) * order + (j - 1))];
      r.add_row({{"i", i}, {"j", j}, {"stderr", e.stderr}, {"value", e.value}});
    }
  return r;
}

ExperimentReport run_moments(const RunConfig& rc) {
  check_common(rc);
  if (rc.m.empty()) throw UsageError("--m", "required (comma list of powers of G_1..G_d)");
  const std::vector<int> m = parse_ints("--m", rc.m);
  if (static_cast<int>(m.size()) > rc.d) throw UsageError("--m", "at most d entries");
  const ModelConfig cfg = model_for(rc, rc.a);
  const bool poisson_law = std::all_of(cfg.nu.begin(), cfg.nu.end(), [](double v) { return v == 0.0; });
  const std::optional<SubmodelSpec> sub = submodel_of(cfg);
  if (!poisson_law && !sub) throw UsageError("--nu", "moments need nu == 0 or a single active nu_c (c >= 2)");
  const std::int64_t samples = rc.samples > 0 ? rc.samples : 20000;
  const std::int64_t reps = rc.reps > 0 ? rc.reps : 10000;

  ExperimentReport r;
  r.id = "moments";
  r.seed = rc.seed;
  r.config = model_json(rc, {rc.a});
  r.config["m"] = m;
  r.config["samples"] = samples;
  r.config["node_reps"] = rc.node_reps;
  r.config["empirical_reps"] = reps;

  MomentSpec spec;
  spec.samples = samples;
  spec.node_reps = rc.node_reps;
  Rng frng(derive_seed(rc.seed, 0));
  MomentEstimate formula;
  if (poisson_law) {
    formula = poisson_joint_moment(m, cfg, base_for(rc, cfg), spec, frng);
  } else {
    formula = gibbs_joint_moment(m, cfg, *sub, spec, frng);
    Rng rrng(derive_seed(rc.seed, 2));
    const MomentEstimate restricted = poisson_joint_moment(m, cfg, BaseMeasure::restricted(sub->c), spec, rrng);
    r.add_row({{"kind", "restricted_poisson_formula"}, {"stderr", restricted.stderr}, {"value", restricted.value}});
  }
  for (const auto& w : formula.warnings) r.warnings.push_back(w);
  r.add_row({{"kind", poisson_law ? "poisson_formula" : "gibbs_formula"}, {"stderr", formula.stderr}, {"value", formula.value}});

  auto product = [&](const UStatVector& G) {
    double p = 1.0;
    for (std::size_t j = 0; j < m.size(); ++j) p *= std::pow(G.values[j], m[j]);
    return p;
  };
  std::vector<double> vals(static_cast<std::size_t>(reps));
  double ess = static_cast<double>(reps);
  if (poisson_law) {
    default_pool().parallel_for(vals.size(), [&](std::size_t i) {
      Rng rng(derive_seed(derive_seed(rc.seed, 1), i));
      vals[i] = product(compute_G(sample_poisson(rng, cfg), cfg));
    });
  } else {
    ChainConfig ch = default_chain_config(cfg, reps, derive_seed(rc.seed, 1));
    if (rc.burn_in >= 0) ch.burn_in = rc.burn_in;
    if (rc.thin > 0) ch.thin = rc.thin;
    ch.n_steps = ch.burn_in + reps * ch.thin;
    const ChainOutput out = run_chain(cfg, *sub, ch);
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = product(out.samples[i]);
    for (const auto& w : out.warnings) r.warnings.push_back(w);
    ess = std::max(1.0, stats::effective_sample_size(vals));
  }
  const stats::Summary s = stats::summarize(vals);
  r.add_row({{"kind", poisson_law ? "empirical_poisson" : "empirical_chain"}, {"ess", ess},
             {"stderr", std::sqrt(s.variance / ess)}, {"value", s.mean}});
  return r;
}

// ---- verify ----------------------------------------------------------------

ExperimentReport run_clt(const RunConfig& rc, bool user_case) {
  CltOptions o;
  o.seed = rc.seed;
  if (!rc.a_grid.empty()) o.a_grid = parse_doubles("--a-grid", rc.a_grid);
  o.min_ess = rc.min_ess;
  o.poisson_control = !rc.no_control;
  if (rc.samples > 0) o.initial_samples = rc.samples;
  if (rc.reps > 0) o.control_reps = rc.reps;
  o.cov_outer = rc.clt_outer;
  o.cov_inner = rc.inner;
  o.nu = rc.nu_c;
  if (!(o.nu < 0.0)) throw UsageError("--nu-c", "must be negative");
  if (user_case) {
    if (rc.c < 2 || rc.c > rc.d || rc.d > kMaxDim) throw UsageError("--c", "need 2 <= c <= d");
    o.cases = {{rc.d, rc.c, !rc.informational_ks}};
  }
  return verify_clt(o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"facetproc: Gibbs facet processes, correlation bounds and CLT checks"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", artifact_version());

  RunConfig rc;
  if (const char* env = std::getenv("FACETPROC_OUTPUT_DIR")) rc.out = env;
  if (rc.out.empty()) rc.out = "facetproc-out";

  auto add_output = [&](CLI::App* s) {
    s->add_option("--out", rc.out, "output directory (default $FACETPROC_OUTPUT_DIR or ./facetproc-out)");
    s->add_option("--format", rc.format, "json | csv | both")->check(CLI::IsMember({"json", "csv", "both"}));
    s->add_flag("--print", rc.print, "echo the JSON report to stdout");
    s->add_flag("-v,--verbose", rc.verbose, "print warnings to stderr");
    s->add_option("--threads", rc.threads, "worker threads (default $FACETPROC_THREADS or all cores)");
    s->add_option("--config", rc.config_file, "key = value file; keys are long flag names; flags override it");
  };

  CLI::App* sim = app.add_subcommand("simulate", "Poisson or Gibbs facet patterns with U-statistics");
  add_model_flags(sim, rc, false);
  sim->add_option("--reps", rc.reps, "patterns to draw")->required();
  sim->add_option("--sampler", rc.sampler, "auto | poisson | mcmc");
  sim->add_option("--burn-in", rc.burn_in, "chain burn-in steps");
  sim->add_option("--thin", rc.thin, "chain thinning");
  sim->add_flag("--patterns", rc.patterns, "include facet lists in the output");
  add_seed_flags(sim, rc);

  CLI::App* pi = app.add_subcommand("pi", "exact pi tables and interior mass");
  add_model_flags(pi, rc, true);
  add_seed_flags(pi, rc);

  CLI::App* bs = app.add_subcommand("bsum", "B-sum grids against the binomial limit");
  bs->add_option("--d", rc.d, "dimension");
  bs->add_option("--b", rc.b, "facet half-side (Q)");
  bs->add_option("--a", rc.a, "intensity parameter");
  bs->add_option("--a-grid", rc.a_grid, "comma list of a values");
  bs->add_option("--c", rc.c, "order c (default 2)");
  bs->add_option("--q", rc.q, "q");
  bs->add_option("--s", rc.s, "s (default d)");
  bs->add_option("--nu-c", rc.nu_c, "nu_c < 0");
  add_seed_flags(bs, rc);

  CLI::App* rho = app.add_subcommand("rho", "correlation bounds, limits and Monte Carlo estimates");
  add_model_flags(rho, rc, true);
  rho->add_option("--k", rc.k, "number of conditioning facets");
  rho->add_option("--reps", rc.reps, "Monte Carlo draws (default 40000)");
  rho->add_option("--z", rc.z, "CI half-width in stderr units");
  add_seed_flags(rho, rc);

  CLI::App* cov = app.add_subcommand("cov", "asymptotic covariance matrices");
  add_model_flags(cov, rc, false);
  cov->add_option("--base", rc.base, "full | restricted (lambda_{c-1})");
  cov->add_option("--k", rc.k, "matrix order (default d, or c-1 when restricted)");
  cov->add_option("--outer", rc.outer, "outer Monte Carlo draws");
  cov->add_option("--inner", rc.inner, "inner Monte Carlo draws");
  add_seed_flags(cov, rc);

  CLI::App* mom = app.add_subcommand("moments", "partition-formula and empirical joint moments");
  add_model_flags(mom, rc, false);
  mom->add_option("--m", rc.m, "powers of G_1..G_d, e.g. 2 or 1,1");
  mom->add_option("--base", rc.base, "Poisson base: full | restricted");
  mom->add_option("--samples", rc.samples, "formula Monte Carlo draws (default 20000)");
  mom->add_option("--node-reps", rc.node_reps, "draws per conditional-intensity node");
  mom->add_option("--reps", rc.reps, "empirical patterns or chain samples (default 10000)");
  mom->add_option("--burn-in", rc.burn_in, "chain burn-in steps");
  mom->add_option("--thin", rc.thin, "chain thinning");
  add_seed_flags(mom, rc);

  CLI::App* clt = app.add_subcommand("clt", "CLT verification (Poisson control and Gibbs submodels)");
  clt->add_option("--d", rc.d, "dimension of a single case (default: the acceptance cases)");
  clt->add_option("--c", rc.c, "order of a single case");
  clt->add_option("--nu-c", rc.nu_c, "nu_c < 0");
  clt->add_option("--a-grid", rc.a_grid, "comma list of a values");
  clt->add_option("--min-ess", rc.min_ess, "effective samples required");
  clt->add_option("--samples", rc.samples, "initial chain samples");
  clt->add_option("--reps", rc.reps, "Poisson control replications");
  clt->add_option("--outer", rc.clt_outer, "covariance outer draws");
  clt->add_option("--inner", rc.inner, "covariance inner draws");
  clt->add_flag("--no-control", rc.no_control, "skip the Poisson control");
  clt->add_flag("--informational-ks", rc.informational_ks, "report the KS test without a verdict");
  add_seed_flags(clt, rc);

  struct VerifyCmd {
    const char* name;
    const char* help;
  };
  const std::vector<VerifyCmd> verify_cmds{
      {"verify-all", "the full acceptance suite"},
      {"verify-geometry", "intersection measure bounds"},
      {"verify-identity", "G_d equals the product of orientation counts"},
      {"verify-poisson", "Poisson moments against the partition formula"},
      {"verify-pi", "MCMC against the exact pi distribution, concentration"},
      {"verify-rho", "correlation functions against their bounds and limits"},
      {"verify-moments", "Gibbs moments against restricted Poisson moments"},
      {"verify-decay", "decay of the Gibbs means"},
      {"verify-clt", "CLT verification at acceptance settings"}};
  for (const auto& v : verify_cmds) add_seed_flags(app.add_subcommand(v.name, v.help), rc);
  const auto all_subcommands = [&app] { return app.get_subcommands([](CLI::App*) { return true; }); };
  for (CLI::App* s : all_subcommands()) add_output(s);

  // Config file: lines "key = value" become "--key value" right after the
  // subcommand, so explicit flags (parsed later) win.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    std::string cfg_path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--config") cfg_path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0) cfg_path = args[i].substr(9);
    if (!args.empty() && args.back().rfind("--config=", 0) == 0) cfg_path = args.back().substr(9);
    if (!cfg_path.empty()) {
      if (args.empty() || args[0].rfind("-", 0) == 0) throw UsageError("--config", "must follow the subcommand");
      CLI::App* sub = nullptr;
      for (CLI::App* s : all_subcommands())
        if (s->get_name() == args[0]) sub = s;
      if (!sub) throw UsageError(args[0], "unknown subcommand");
      std::ifstream in(cfg_path);
      if (!in) throw UsageError("--config", "cannot read '" + cfg_path + "'");
      std::vector<std::string> extra;
      std::string line;
      int lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto trim = [](std::string s) {
          const auto b = s.find_first_not_of(" \t\r");
          const auto e = s.find_last_not_of(" \t\r");
          return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
          throw UsageError("--config", cfg_path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        const CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (!opt || key == "config")
          throw UsageError("--config", cfg_path + ":" + std::to_string(lineno) + ": unknown key '" + key + "' for " +
                                           args[0]);
        extra.push_back("--" + key);
        if (opt->get_type_size() != 0) {
          extra.push_back(value);
        } else if (value != "true" && value != "1") {
          if (value == "false" || value == "0") extra.pop_back();
          else throw UsageError("--config", cfg_path + ":" + std::to_string(lineno) + ": flag '" + key + "' takes true/false");
        }
      }
      args.insert(args.begin() + 1, extra.begin(), extra.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (rc.threads > 0) setenv("FACETPROC_THREADS", std::to_string(rc.threads).c_str(), 1);

  std::vector<ExperimentReport> reports;
  bool verdicts_gate = false;
  try {
    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    if (name == "simulate") reports.push_back(run_simulate(rc));
    else if (name == "pi") reports.push_back(run_pi(rc));
    else if (name == "bsum") reports.push_back(run_bsum(rc));
    else if (name == "rho") reports.push_back(run_rho(rc));
    else if (name == "cov") reports.push_back(run_cov(rc));
    else if (name == "moments") reports.push_back(run_moments(rc));
    else if (name == "clt") {
      reports.push_back(run_clt(rc, chosen->count("--c") + chosen->count("--d") > 0));
      verdicts_gate = true;
    } else {
      verdicts_gate = true;
      if (name == "verify-all") {
        reports = verify_all(rc.seed);
      } else if (name == "verify-geometry") {
        GeometryVerifyOptions o;
        o.seed = rc.seed;
        reports.push_back(verify_geometry_bounds(o));
      } else if (name == "verify-identity") {
        ProductIdentityOptions o;
        o.seed = rc.seed;
        reports.push_back(verify_product_identity(o));
      } else if (name == "verify-poisson") {
        PoissonMomentOptions o;
        o.seed = rc.seed;
        reports.push_back(verify_poisson_moments(o));
      } else if (name == "verify-pi") {
        PiVerifyOptions o;
        o.seed = rc.seed;
        reports.push_back(verify_pi(o));
      } else if (name == "verify-rho") {
        RhoVerifyOptions o;
        o.seed = rc.seed;
        reports.push_back(verify_rho(o));
      } else if (name == "verify-moments") {
        MomentMatchOptions o;
        o.seed = rc.seed;
        reports.push_back(verify_moment_match(o));
      } else if (name == "verify-decay") {
        MeanDecayOptions o;
        o.seed = rc.seed;
        reports.push_back(verify_mean_decay(o));
      } else if (name == "verify-clt") {
        CltOptions o;
        o.seed = rc.seed;
        reports.push_back(verify_clt(o));
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }

  bool all_pass = true;
  try {
    std::filesystem::create_directories(rc.out);
    for (const ExperimentReport& r : reports) {
      write_report(r, rc.out, rc.format != "csv", rc.format != "json");
      if (rc.print) std::cout << r.to_json().dump(2) << "\n";
      std::cout << r.id << ": " << r.rows.size() << " rows -> " << (std::filesystem::path(rc.out) / r.id).string() << "\n";
      for (const Verdict& v : r.verdicts)
        std::cout << "  " << (v.pass ? "PASS" : "FAIL") << (v.informational ? " (info) " : " ") << v.name << "\n";
      if (!r.warnings.empty()) std::cout << "  " << r.warnings.size() << " warning(s)\n";
      if (rc.verbose)
        for (const auto& w : r.warnings) std::cerr << "warning: " << r.id << ": " << w << "\n";
      all_pass = all_pass && r.passed();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  if (verdicts_gate && !all_pass) return kExitVerdict;
  return kExitOk;
}
