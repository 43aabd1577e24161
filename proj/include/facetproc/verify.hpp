#pragma once

#include <cstdint>
#include <vector>

#include "facetproc/report.hpp"

namespace facetproc {

struct GeometryVerifyOptions {
  std::vector<int> dims{2, 3, 4};
  std::int64_t tuples = 10000;
  double b = 1.0;
  std::uint64_t seed = 1;
};
/// Intersection bounds over random distinct-orientation tuples; exact comparisons.
ExperimentReport verify_geometry_bounds(const GeometryVerifyOptions& opts);

struct ProductIdentityOptions {
  std::vector<int> dims{2, 3, 4};
  std::int64_t patterns = 1000;
  int max_size = 30;
  double b = 1.0;
  std::uint64_t seed = 2;
};
/// Enumerated G_d == prod theta_i exactly.
ExperimentReport verify_product_identity(const ProductIdentityOptions& opts);

struct PoissonMomentOptions {
  int d = 2;
  double b = 1.0;
  double a = 5.0;
  std::int64_t reps = 10000;
  std::int64_t formula_samples = 200000;
  double z = 4.0;
  std::uint64_t seed = 3;
};
/// Empirical E G_1, E G_2, E G_1^2 of Poisson samples against the partition
/// formula, plus the partition counts |Pi_{1,1}| = 2 and |Pi_{2,2}| = 7.
ExperimentReport verify_poisson_moments(const PoissonMomentOptions& opts);

struct PiVerifyOptions {
  int d = 2;
  double b = 1.0;
  double nu = -1.0;
  std::vector<double> A_grid{1.0, 4.0};
  double min_ess = 1e5;
  double tv_threshold = 0.05;
  int max_doublings = 4;
  std::vector<double> mass_grid{2.0, 5.0, 10.0, 20.0};
  double mass_threshold = 0.01;
  std::uint64_t seed = 4;
};
/// MCMC theta samples vs exact pi (with a nu = 0 control), and concentration of
/// the exact interior mass / product moment along mass_grid.
ExperimentReport verify_pi(const PiVerifyOptions& opts);

struct RhoCase {
  int d = 2;
  int c = 2;
  int k = 1;
};

struct RhoVerifyOptions {
  std::vector<RhoCase> cases{{2, 2, 1}, {2, 2, 2}, {3, 2, 1}};
  std::vector<double> a_grid{5.0, 10.0, 20.0};
  /// Reported beyond the grid (no verdict weight).
  std::vector<double> trend_extension{40.0, 80.0};
  double nu = -1.0;
  double b = 1.0;
  std::int64_t reps = 40000;
  double coverage = 0.95;
  double z = 4.0;
  /// (c, q, s, d) for the convergence of B to binom(s-q, s-c+1).
  std::vector<std::array<int, 4>> b_triples{{2, 0, 2, 2}, {2, 1, 2, 2}, {2, 1, 3, 3}};
  std::vector<double> b_grid{5.0, 10.0, 20.0, 40.0};
  std::uint64_t seed = 5;
};
ExperimentReport verify_rho(const RhoVerifyOptions& opts);

struct MeanDecayCase {
  int d = 2;
  int c = 2;
};

struct MeanDecayOptions {
  std::vector<MeanDecayCase> cases{{2, 2}, {3, 2}};
  std::vector<double> a_grid{5.0, 20.0, 50.0, 100.0};
  double nu = -1.0;
  double b = 1.0;
  std::int64_t samples = 4000;
  double burn_in_factor = 50.0;
  double z = 4.0;
  double final_fraction = 0.01;
  std::uint64_t seed = 6;
};
ExperimentReport verify_mean_decay(const MeanDecayOptions& opts);

struct CltCase {
  int d = 2;
  int c = 2;
  /// KS verdicts enter the acceptance decision (otherwise reported only).
  bool ks_verdict = true;
};

struct CltOptions {
  bool poisson_control = true;
  int control_d = 2;
  std::int64_t control_reps = 10000;
  std::vector<CltCase> cases{{2, 2, true}, {3, 3, false}};
  std::vector<double> a_grid{100.0};
  double nu = -1.0;
  double b = 1.0;
  double min_ess = 4000.0;
  std::int64_t initial_samples = 40000;
  int max_doublings = 3;
  double burn_in_factor = 50.0;
  double cov_tolerance = 0.10;
  double ks_alpha = 0.01;
  std::int64_t cov_outer = 200000;
  std::int64_t cov_inner = 64;
  std::uint64_t seed = 7;
};
ExperimentReport verify_clt(const CltOptions& opts);

struct MomentMatchOptions {
  int d = 2;
  int c = 2;
  double nu = -1.0;
  double b = 1.0;
  std::vector<double> a_grid{5.0, 20.0, 50.0, 100.0};
  std::int64_t samples = 20000;
  double burn_in_factor = 50.0;
  double control_a = 5.0;
  double z = 4.0;
  std::uint64_t seed = 8;
};
ExperimentReport verify_moment_match(const MomentMatchOptions& opts);

/// Every experiment at its default (acceptance) settings, master seed mixed in.
std::vector<ExperimentReport> verify_all(std::uint64_t master_seed);

}  // namespace facetproc
