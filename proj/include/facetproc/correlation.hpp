#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facetproc/model.hpp"
#include "facetproc/types.hpp"

namespace facetproc {

struct RhoOptions {
  std::int64_t reps = 20000;
  /// Strata whose bound on the contribution is below prune_rel * (lower bound
  /// of the expectation) are dropped and counted in the truncation error.
  double prune_rel = 1e-10;
  /// Required bound on the Poisson mass outside the count box, relative to the
  /// lower bound of the expectation.
  double tail_rel = 1e-13;
  int max_K = 600;
  double warn_rel_stderr = 0.10;
};

/// E exp(nu_c G_c(eta_a ∪ x)) estimated by stratifying eta_a on its orientation
/// counts. The true value lies in [value, value + truncation] up to MC error.
struct ExpectationEstimate {
  double value = 0.0;
  double variance = 0.0;
  double truncation = 0.0;
  bool exact = false;
};

struct RhoEstimate {
  double value = 1.0;
  double stderr = 0.0;
  /// Certified bound from pruned strata, the count-box tail and rounding.
  double truncation_error = 0.0;
  double numerator = 1.0;
  double denominator = 1.0;
  double den_rel_stderr = 0.0;
  bool exact = false;
  std::size_t strata = 0;
  std::size_t sampled_strata = 0;
  std::int64_t draws = 0;
  std::vector<std::string> warnings;

  double ci_low(double z = 4.0) const { return value - z * stderr - truncation_error; }
  double ci_high(double z = 4.0) const { return value + z * stderr + truncation_error; }
};

/// Correlation functions rho_p(x; mu_a^{(c)}) of one submodel. Stratum plans
/// depend on x only through its orientation multiplicities and are cached.
/// For c = d every stratum is deterministic and the result is exact.
class CorrelationEstimator {
 public:
  CorrelationEstimator(ModelConfig config, int c, RhoOptions opts = {});
  ~CorrelationEstimator();
  CorrelationEstimator(const CorrelationEstimator&) = delete;
  CorrelationEstimator& operator=(const CorrelationEstimator&) = delete;

  const ModelConfig& config() const { return config_; }
  int order() const { return c_; }
  double nu_c() const { return nu_c_; }
  double rate() const { return rate_; }
  bool exact() const { return c_ == config_.d; }

  /// Ratio with common random numbers for numerator and denominator.
  RhoEstimate rho(std::span<const Facet> x, Rng& rng);

  /// Independent estimate of E exp(nu_c G_c(eta ∪ x)). With `roulette`, strata
  /// allotted fewer than one draw are sampled with that probability and
  /// reweighted, which keeps the estimate unbiased but leaves `variance` partial.
  ExpectationEstimate expectation(std::span<const Facet> x, Rng& rng, std::int64_t reps, bool roulette = false);

  /// E exp(nu_c G_c(eta)), computed on first use and shared afterwards.
  const ExpectationEstimate& denominator(Rng& rng);

 private:
  struct Plan;
  const Plan& plan(const std::array<int, kMaxDim>& m1, const std::optional<std::array<int, kMaxDim>>& m2);

  ModelConfig config_;
  int c_;
  double nu_c_;
  double rate_;
  RhoOptions opts_;
  std::mutex mutex_;
  std::map<std::vector<int>, std::unique_ptr<Plan>> plans_;
  std::optional<ExpectationEstimate> den_;
};

/// rho_p(x; mu_a^{(c)}) with nu_c taken from config.nu (only nu_c may be non-zero).
RhoEstimate rho_mc_estimate(std::span<const Facet> x, int c, const ModelConfig& config, std::int64_t reps, Rng& rng);

}  // namespace facetproc
