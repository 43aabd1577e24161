#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "facetproc/analytic.hpp"
#include "facetproc/correlation.hpp"
#include "facetproc/model.hpp"
#include "facetproc/stats.hpp"
#include "facetproc/ustats.hpp"

using namespace facetproc;

namespace {

std::vector<Facet> centred(int d, int k) {
  std::vector<Facet> x;
  for (int i = 0; i < k; ++i) {
    std::vector<double> z(static_cast<std::size_t>(d), 0.5);
    x.push_back(make_facet(z, i));
  }
  return x;
}

// Plain Monte Carlo ratio over independent Poisson draws.
Estimate plain_ratio(const ModelConfig& cfg, int c, const std::vector<Facet>& x, int reps, Rng& rng) {
  std::vector<double> num, den;
  for (int i = 0; i < reps; ++i) {
    FacetPattern p = sample_poisson(rng, cfg);
    den.push_back(std::exp(cfg.nu_of(c) * compute_G(p, cfg).G(c)));
    p.insert(p.end(), x.begin(), x.end());
    num.push_back(std::exp(cfg.nu_of(c) * compute_G(p, cfg).G(c)));
  }
  const auto sn = stats::summarize(num), sd = stats::summarize(den);
  const double r = sn.mean / sd.mean;
  const double cov = stats::covariance(num, den);
  const double var = (sn.variance - 2 * r * cov + r * r * sd.variance) / (sd.mean * sd.mean * reps);
  return {r, std::sqrt(var)};
}

}  // namespace

TEST_CASE("validation") {
  CHECK_THROWS_AS(CorrelationEstimator(make_config(2, 1.0, 5.0), 2), std::invalid_argument);
  CHECK_THROWS_AS(CorrelationEstimator(make_config(3, 1.0, 5.0, {0.0, -1.0, -1.0}), 2), std::invalid_argument);
  CHECK_THROWS_AS(CorrelationEstimator(make_config(3, 1.0, 5.0, {0.0, -1.0, 0.0}), 4), std::invalid_argument);
}

TEST_CASE("weak interaction gives correlation 1") {
  Rng rng(81);
  for (const int d : {2, 3}) {
    const ModelConfig cfg = make_config(d, 1.0, 5.0, std::vector<double>(static_cast<std::size_t>(d), 0.0));
    const ModelConfig weak = with_submodel(cfg, {2, -1e-12});
    const RhoEstimate e = rho_mc_estimate(centred(d, 1), 2, weak, 2000, rng);
    CHECK(std::abs(e.value - 1.0) < 1e-9);
  }
}

TEST_CASE("c = d is exact and matches the double-sum oracle") {
  Rng rng(82);
  const ModelConfig cfg = make_config(2, 1.0, 20.0, {0.0, -1.0});
  const RhoEstimate e = rho_mc_estimate(centred(2, 1), 2, cfg, 1000, rng);
  CHECK(e.exact);
  CHECK(e.stderr == 0.0);
  CHECK(std::abs(e.value - 0.49521480508266518) <= e.truncation_error + 1e-12);
  const RhoBounds bd = rho_bounds(2, 10.0, 1, 2, -1.0, 1.0);
  CHECK(e.ci_low() <= bd.upper);
  CHECK(bd.lower <= e.ci_high());
  const RhoEstimate e2 = rho_mc_estimate(centred(2, 2), 2, cfg, 1000, rng);
  CHECK(std::abs(e2.value - 0.00078252493535559558) <= e2.truncation_error + 1e-14);
}

TEST_CASE("d = 3 agrees with plain Monte Carlo and meets the bounds") {
  Rng rng(83);
  const ModelConfig cfg = make_config(3, 1.0, 5.0, {0.0, -1.0, 0.0});
  const auto x = centred(3, 1);
  CorrelationEstimator est(cfg, 2);
  const RhoEstimate e = est.rho(x, rng);
  CHECK_FALSE(e.exact);
  CHECK(e.stderr > 0.0);
  const Estimate p = plain_ratio(cfg, 2, x, 40000, rng);
  CHECK(std::abs(e.value - p.value) < 4.0 * std::hypot(e.stderr, p.stderr) + e.truncation_error);
  const RhoBounds bd = rho_bounds(2, est.rate(), 1, 3, -1.0, 1.0);
  CHECK(e.ci_low() <= bd.upper);
  CHECK(bd.lower <= e.ci_high());
}

TEST_CASE("p > c tuple agrees with plain Monte Carlo") {
  Rng rng(84);
  const ModelConfig cfg = make_config(3, 1.0, 3.0, {0.0, -1.0, 0.0});
  const auto x = centred(3, 3);
  CorrelationEstimator est(cfg, 2);
  const RhoEstimate e = est.rho(x, rng);
  const Estimate p = plain_ratio(cfg, 2, x, 40000, rng);
  CHECK(std::abs(e.value - p.value) < 4.0 * std::hypot(e.stderr, p.stderr) + e.truncation_error);
}

TEST_CASE("deterministic given the seed") {
  const ModelConfig cfg = make_config(3, 1.0, 10.0, {0.0, -1.0, 0.0});
  Rng r1(85), r2(85);
  const RhoEstimate a = rho_mc_estimate(centred(3, 1), 2, cfg, 5000, r1);
  const RhoEstimate b = rho_mc_estimate(centred(3, 1), 2, cfg, 5000, r2);
  CHECK(a.value == b.value);
  CHECK(a.stderr == b.stderr);
}

TEST_CASE("expectation and shared denominator") {
  const ModelConfig cfg = make_config(3, 1.0, 5.0, {0.0, -1.0, 0.0});
  CorrelationEstimator est(cfg, 2);
  Rng rng(86);
  const ExpectationEstimate& d1 = est.denominator(rng);
  const double v = d1.value;
  CHECK(v > 0.0);
  CHECK(v < 1.0);
  CHECK(est.denominator(rng).value == v);
  const std::vector<Facet> none;
  const ExpectationEstimate e0 = est.expectation(none, rng, 20000);
  CHECK(std::abs(e0.value - v) < 4.0 * std::sqrt(e0.variance + d1.variance) + e0.truncation + d1.truncation);
}
