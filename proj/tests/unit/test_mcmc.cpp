#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "facetproc/mcmc.hpp"
#include "facetproc/model.hpp"
#include "facetproc/stats.hpp"
#include "facetproc/ustats.hpp"

using namespace facetproc;

namespace {

ChainConfig chain(std::int64_t burn, std::int64_t thin, std::int64_t samples, std::uint64_t seed) {
  ChainConfig c;
  c.burn_in = burn;
  c.thin = thin;
  c.n_steps = burn + thin * samples;
  c.seed = seed;
  return c;
}

Estimate chain_mean(const std::vector<double>& x) {
  const auto s = stats::summarize(x);
  const double ess = std::max(1.0, stats::effective_sample_size(x));
  return {s.mean, std::sqrt(s.variance / ess)};
}

}  // namespace

TEST_CASE("chain config") {
  ChainConfig c = chain(10, 3, 7, 1);
  CHECK(c.sample_count() == 7);
  c.n_steps = 32;
  CHECK(c.sample_count() == 7);
  CHECK_NOTHROW(c.validate());
  ChainConfig bad = c;
  bad.burn_in = bad.n_steps;
  CHECK_THROWS(bad.validate());
  bad = c;
  bad.thin = 0;
  CHECK_THROWS(bad.validate());
  bad = c;
  bad.moves = {0.5, 0.5, 0.5};
  CHECK_THROWS(bad.validate());
  const ChainConfig def = default_chain_config(make_config(2, 1.0, 10.0), 100, 3);
  CHECK(def.burn_in == 100);
  CHECK(def.thin == 5);
  CHECK(def.sample_count() == 100);
}

TEST_CASE("acceptance ratios equal the density ratio") {
  const ModelConfig cfg = make_config(2, 1.0, 3.0, {0.0, -1.3});
  const BdmSampler s(cfg);
  const FacetPattern x{make_facet({0.3, 0.4}, 0), make_facet({0.6, 0.1}, 1)};
  const Facet u = make_facet({0.45, 0.7}, 1);
  FacetPattern xu = x;
  xu.push_back(u);
  const double dens = log_density_unnormalized(xu, cfg) - log_density_unnormalized(x, cfg);
  const double mass = cfg.a * lambda_total(cfg);
  const ClassedPattern cx(x, 2);
  CHECK(std::abs(s.birth_log_ratio(cx, u) - (std::log(mass / 3.0) + dens)) <= 1e-12);
  CHECK(std::abs(s.death_log_ratio(cx, u, 3) + s.birth_log_ratio(cx, u)) <= 1e-12);

  const Facet v = make_facet({0.9, 0.2}, 0);
  const FacetPattern xv{x[0], x[1], v};
  const double move = log_density_unnormalized(xv, cfg) - log_density_unnormalized(xu, cfg);
  CHECK(std::abs(s.move_log_ratio(cx, u, v) - move) <= 1e-12);

  const BdmSampler skew(cfg, {0.5, 0.25, 0.25});
  CHECK(std::abs(skew.birth_log_ratio(cx, u) - (std::log(0.5) + std::log(mass / 3.0) + dens)) <= 1e-12);
  CHECK(std::abs(skew.death_log_ratio(cx, u, 3) + skew.birth_log_ratio(cx, u)) <= 1e-12);
}

TEST_CASE("acceptance ratios invariant under relabeling") {
  Rng rng(51);
  const ModelConfig cfg = with_submodel(make_config(3, 1.0, 6.0), {2, -0.6});
  const BdmSampler s(cfg);
  for (int t = 0; t < 50; ++t) {
    FacetPattern x = sample_poisson(rng, cfg);
    const Facet u = sample_facet(rng, cfg);
    const double r0 = s.birth_log_ratio(ClassedPattern(x, 3), u);
    std::shuffle(x.begin(), x.end(), rng);
    CHECK(std::abs(s.birth_log_ratio(ClassedPattern(x, 3), u) - r0) <= 1e-12);
  }
}

TEST_CASE("death from the empty state is rejected") {
  const ModelConfig cfg = make_config(2, 1.0, 2.0, {0.0, -1.0});
  BdmSampler s(cfg, {0.0, 1.0, 0.0});
  Rng rng(52);
  for (int i = 0; i < 10; ++i) s.step(rng);
  CHECK(s.state().size() == 0);
  CHECK(s.acceptance().accepted[1] == 0);
  CHECK(s.acceptance().proposed[1] == 10);
  CHECK(bdm_step({}, cfg, rng).size() <= 1);
}

TEST_CASE("nu = 0 chain is Poisson") {
  const ModelConfig cfg = make_config(2, 1.0, 5.0);
  const ChainOutput out = run_chain(cfg, chain(200, 200, 5000, 53));
  std::vector<std::int64_t> counts;
  std::vector<double> g1, g2;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    counts.push_back(out.thetas[i].total());
    g1.push_back(out.samples[i].G(1));
    g2.push_back(out.samples[i].G(2));
  }
  CHECK(stats::chi_square_poisson(counts, 5.0).p_value > 0.01);
  const Estimate m1 = chain_mean(g1), m2 = chain_mean(g2);
  CHECK(std::abs(m1.value - 10.0) < 4.0 * m1.stderr);
  CHECK(std::abs(m2.value - 6.25) < 4.0 * m2.stderr);
}

TEST_CASE("hard-core limit") {
  // Oracle: Poisson patterns conditioned on no crossings, by rejection.
  const ModelConfig cfg = make_config(2, 1.0, 2.0, {0.0, -20.0});
  const ModelConfig poisson = make_config(2, 1.0, 2.0);
  Rng rng(54);
  std::vector<double> ref;
  while (ref.size() < 20000) {
    const FacetPattern p = sample_poisson(rng, poisson);
    if (compute_G(p, poisson).G(2) == 0.0) ref.push_back(static_cast<double>(p.size()));
  }
  const auto sr = stats::summarize(ref);
  const ChainOutput out = run_chain(cfg, chain(200, 20, 20000, 55));
  std::vector<double> n;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    CHECK(out.samples[i].G(2) == 0.0);
    n.push_back(static_cast<double>(out.thetas[i].total()));
  }
  const Estimate m = chain_mean(n);
  CHECK(std::abs(m.value - sr.mean) < 4.0 * std::hypot(m.stderr, std::sqrt(sr.variance / 20000.0)));
}

TEST_CASE("same seed gives identical output") {
  const ModelConfig cfg = make_config(3, 1.0, 4.0, {0.0, -0.5, 0.0});
  ChainConfig c = chain(100, 7, 300, 56);
  c.record_patterns = true;
  const ChainOutput a = run_chain(cfg, c), b = run_chain(cfg, c);
  REQUIRE(a.samples.size() == 300);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    REQUIRE(a.thetas[i] == b.thetas[i]);
    REQUIRE(a.patterns[i] == b.patterns[i]);
    for (int j = 1; j <= 3; ++j) REQUIRE(a.samples[i].G(j) == b.samples[i].G(j));
  }
  CHECK(a.acceptance.accepted == b.acceptance.accepted);
  CHECK(a.ess == b.ess);
  c.seed = 57;
  const ChainOutput other = run_chain(cfg, c);
  bool differs = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) differs = differs || !(a.thetas[i] == other.thetas[i]);
  CHECK(differs);
}

TEST_CASE("repulsion lowers G_2") {
  const ModelConfig cfg = make_config(2, 1.0, 10.0, {0.0, -1.0});
  const ChainOutput out = run_chain(cfg, default_chain_config(cfg, 4000, 58));
  const Estimate m = chain_mean(out.G_series(2));
  CHECK(m.value + 4.0 * m.stderr < 25.0);
}

TEST_CASE("empty and Poisson starts agree") {
  const ModelConfig cfg = make_config(2, 1.0, 8.0, {0.0, -1.0});
  ChainConfig c = default_chain_config(cfg, 4000, 59);
  const ChainOutput empty = run_chain(cfg, c);
  c.init_from_poisson = true;
  c.seed = 60;
  const ChainOutput pois = run_chain(cfg, c);
  const Estimate a = chain_mean(empty.G_series(1)), b = chain_mean(pois.G_series(1));
  CHECK(std::abs(a.value - b.value) < 4.0 * std::hypot(a.stderr, b.stderr));
}

TEST_CASE("theta chain") {
  SUBCASE("nu_d = 0 gives independent Poisson(A)") {
    const ModelConfig cfg = make_config(2, 1.0, 6.0);
    // Thinned to near independence; the chi-square test assumes it.
    const auto th = sample_theta_chain(cfg, chain(100, 200, 5000, 61));
    std::vector<std::int64_t> t0;
    for (const auto& t : th) t0.push_back(t[0]);
    CHECK(stats::chi_square_poisson(t0, 3.0).p_value > 0.01);
  }
  SUBCASE("pi(1,1) / pi(0,0) = e^-1 at A = 1") {
    const ModelConfig cfg = make_config(2, 1.0, 2.0, {0.0, -1.0});
    ChainOutput diag;
    const auto th = sample_theta_chain(cfg, chain(100, 4, 200000, 62), &diag);
    double n00 = 0, n11 = 0;
    for (const auto& t : th) {
      n00 += (t[0] == 0 && t[1] == 0) ? 1 : 0;
      n11 += (t[0] == 1 && t[1] == 1) ? 1 : 0;
    }
    const double ratio = n11 / n00;
    const double inflation = static_cast<double>(th.size()) / std::min(diag.ess_theta[0], diag.ess_theta[1]);
    const double se = ratio * std::sqrt((1.0 / n11 + 1.0 / n00) * std::max(1.0, inflation));
    CHECK(std::abs(ratio - std::exp(-1.0)) < 4.0 * se);
  }
  SUBCASE("only nu_d may be non-zero") {
    CHECK_NOTHROW(sample_theta_chain(make_config(2, 1.0, 2.0, {0.0, -1.0}), chain(0, 1, 10, 63)));
    CHECK_THROWS_AS(sample_theta_chain(make_config(3, 1.0, 2.0, {0.0, -1.0, -1.0}), chain(0, 1, 10, 63)),
                    std::invalid_argument);
  }
}

TEST_CASE("diagnostic warnings do not throw") {
  const ModelConfig cfg = make_config(2, 1.0, 2.0);
  const ChainOutput out = run_chain(cfg, chain(0, 1, 20, 64));
  CHECK(out.samples.size() == 20);
  CHECK_FALSE(out.warnings.empty());
}
