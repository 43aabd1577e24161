#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace facetproc::stats {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

Summary summarize(std::span<const double> x);
double covariance(std::span<const double> x, std::span<const double> y);

/// Autocovariance-based ESS: Geyer's initial positive sequence, truncated at
/// the first non-positive pair sum. Capped at n; n for a constant series.
double effective_sample_size(std::span<const double> x);

double normal_cdf(double z);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov test against N(mean, variance).
KsResult ks_test_normal(std::span<const double> x, double mean, double variance);
/// Asymptotic Kolmogorov tail with Stephens' finite-n correction.
double kolmogorov_pvalue(double statistic, std::size_t n);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Goodness of fit of integer samples to Poisson(mean); bins pooled to expected >= 5.
ChiSquareResult chi_square_poisson(std::span<const std::int64_t> samples, double mean);
double chi_square_sf(double x, int dof);

double log_poisson_pmf(std::int64_t k, double mean);
/// Chernoff bound on log P(X >= k) for X ~ Poisson(mean); 0 when k <= mean.
double log_poisson_upper_tail(std::int64_t k, double mean);

/// Numerically stable accumulation of sum exp(t_i).
class LogSumExp {
 public:
  void add(double log_term);
  void add_log_sum(const LogSumExp& other) { if (other.max_ != kEmpty) add_scaled(other); }
  double log_value() const;
  double value() const;
  bool empty() const { return max_ == kEmpty; }

 private:
  static constexpr double kEmpty = -1.0e308;
  void add_scaled(const LogSumExp& other);
  double max_ = kEmpty;
  double sum_ = 0.0;
};

}  // namespace facetproc::stats
