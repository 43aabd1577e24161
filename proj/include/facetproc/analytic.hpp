#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "facetproc/model.hpp"
#include "facetproc/types.hpp"

namespace facetproc {

/// Per-coordinate cap for the infinite sums and the neglected mass.
/// K = 0 asks for the default floor ceil(rate + 10 sqrt(rate) + 20); K is then
/// raised until tail_bound <= tol * (truncated value).
struct TruncationSpec {
  int K = 0;
  double tol = 1e-13;
  int max_K = 4000;
  double tail_bound = 0.0;  // output
};

int default_truncation_K(double rate);

double binomial(int n, int k);

/// A = a T / d (A = a b^d / d for chi == 1).
double pi_rate(const ModelConfig& config);

/// Law of the orientation counts of the order-d submodel on the box [0,K]^d:
/// pi(k) ∝ A^{sum k} / prod k_i! * exp(nu_d prod k_i).
class PiDistribution {
 public:
  PiDistribution(int d, double A, double nu_d, TruncationSpec trunc = {});

  int dim() const { return d_; }
  int K() const { return K_; }
  double A() const { return A_; }
  double nu() const { return nu_; }
  /// Bound on the normalized mass outside the box.
  double tail_bound() const { return tail_; }

  double pmf(const OrientationCounts& k) const;
  double pmf_index(std::size_t flat) const { return table_[flat]; }
  std::size_t cells() const { return table_.size(); }
  /// Counts of cell `flat` (coordinate 0 varies fastest).
  OrientationCounts counts_of(std::size_t flat) const;

  double interior_mass() const;
  double product_moment() const;
  /// Neglected contribution to product_moment.
  double product_moment_tail() const;
  /// sum_k f(k) pi(k) over the box.
  template <class Fn>
  double expectation(Fn&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < table_.size(); ++i)
      if (table_[i] > 0.0) s += f(counts_of(i)) * table_[i];
    return s;
  }

 private:
  int d_;
  double A_;
  double nu_;
  int K_;
  double tail_ = 0.0;
  double log_z_ = 0.0;
  std::vector<double> table_;
};

double pi_pmf(const OrientationCounts& k, double A, double nu_d, TruncationSpec* trunc = nullptr);
double pi_interior_mass(double A, double nu_d, int d, TruncationSpec* trunc = nullptr);
double pi_product_moment(double A, double nu_d, int d, TruncationSpec* trunc = nullptr);

/// Number of c-subsets with pairwise distinct orientations among q fixed facets
/// of orientations 1..q and theta_j further facets of orientation j (j <= s):
/// sum_F binom(|[q] \ F|, c - |F|) prod_{j in F} theta_j over F ⊂ [s].
std::int64_t a_count(int c, int q, int s, std::span<const std::int64_t> theta);
/// The displayed subset sum: F ⊂ [s], c-q <= |F| <= c, |F ∪ [q]| >= c.
std::int64_t a_count_displayed(int c, int q, int s, std::span<const std::int64_t> theta);

struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;
  int K = 0;
};

/// B(c,Q,rate,q,s) = sum_{n in N^d} rate^{sum n}/prod n_i! exp(nu_c Q^{d-c} A(c,q,s,n) - rate (c-1)).
/// Coordinates s+1..d do not enter A and are summed in closed form.
SeriesValue b_sum(int c, double Q, double rate, int q, int s, double nu_c, int d, TruncationSpec trunc = {});

struct RhoBounds {
  double lower = 0.0;
  double upper = 0.0;
  /// Ratios of the truncated sums, before widening by the tail bounds.
  double lower_raw = 0.0;
  double upper_raw = 0.0;
};

/// B(c,2b,rate,p,d)/B(c,b,rate,0,d) <= rho_p <= B(c,b,rate,p,d)/B(c,2b,rate,0,d),
/// for p facets of orientations 1..p; widened to stay valid under truncation.
RhoBounds rho_bounds(int c, double rate, int p, int d, double nu_c, double b, TruncationSpec trunc = {});

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// binom(d-k, d-c+1) / binom(d, d-c+1).
Rational rho_limit(int d, int c, int k);

struct CovarianceSpec {
  std::int64_t outer = 20000;
  std::int64_t inner = 64;
  std::uint64_t seed = 1;
};

/// <g_1^{(i)}, g_1^{(j)}> in L^2(base). Closed form when i = j = 1, a single
/// Monte Carlo layer when one index is 1, nested otherwise.
Estimate asymptotic_covariance(int i, int j, const ModelConfig& config, BaseMeasure base, CovarianceSpec spec = {});

/// n x n matrix of asymptotic_covariance (row-major), each entry with its own stream.
std::vector<Estimate> covariance_matrix(int n, const ModelConfig& config, BaseMeasure base, CovarianceSpec spec = {});

}  // namespace facetproc
