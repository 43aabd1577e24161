#include "facetproc/analytic.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "facetproc/geometry.hpp"
#include "facetproc/parallel.hpp"
#include "facetproc/stats.hpp"
#include "facetproc/ustats.hpp"

namespace facetproc {
namespace {

constexpr std::size_t kMaxCells = 40'000'000;

std::size_t box_cells(int K, int s) {
  double cells = std::pow(static_cast<double>(K + 1), s);
  if (cells > static_cast<double>(kMaxCells)) throw std::invalid_argument("truncation box too large");
  return static_cast<std::size_t>(cells);
}

int next_K(int K) { return K + std::max(5, K / 4); }

// log(x^k / k!) for k = 0..K.
std::vector<double> log_weights(double x, int K) {
  std::vector<double> w(static_cast<std::size_t>(K + 1));
  const double lx = std::log(x);
  for (int k = 0; k <= K; ++k) w[static_cast<std::size_t>(k)] = k * lx - std::lgamma(k + 1.0);
  return w;
}

struct SubsetTerm {
  std::uint32_t mask;
  std::int64_t mult;
};

std::vector<SubsetTerm> a_count_terms(int c, int q, int s) {
  std::vector<SubsetTerm> terms;
  for (std::uint32_t F = 0; F < (1u << s); ++F) {
    const int size = std::popcount(F);
    if (size > c) continue;
    const int free_fixed = q - std::popcount(F & ((1u << q) - 1u));
    const double m = binomial(free_fixed, c - size);
    if (m > 0) terms.push_back({F, static_cast<std::int64_t>(m)});
  }
  return terms;
}

void check_acount_args(int c, int q, int s, std::size_t theta_size) {
  if (c < 1 || q < 0 || q > s || s > kMaxDim) throw std::invalid_argument("a_count: need c >= 1, 0 <= q <= s <= 8");
  if (theta_size < static_cast<std::size_t>(s)) throw std::invalid_argument("a_count: theta shorter than s");
}

}  // namespace

int default_truncation_K(double rate) {
  return static_cast<int>(std::ceil(rate + 10.0 * std::sqrt(rate) + 20.0));
}

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double pi_rate(const ModelConfig& config) { return config.a * lambda_total(config) / config.d; }

PiDistribution::PiDistribution(int d, double A, double nu_d, TruncationSpec trunc) : d_(d), A_(A), nu_(nu_d) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("pi: dimension out of range");
  if (!(A > 0)) throw std::invalid_argument("pi: A must be positive");
  if (nu_d > 0) throw std::invalid_argument("pi: nu_d must be <= 0");
  int K = std::max(trunc.K > 0 ? trunc.K : 0, default_truncation_K(A));
  for (;;) {
    const std::size_t cells = box_cells(K, d);
    const auto lw = log_weights(A, K);
    table_.assign(cells, 0.0);
    std::array<int, kMaxDim> k{};
    double mx = -INFINITY;
    for (std::size_t i = 0; i < cells; ++i) {
      double l = 0.0, prod = 1.0;
      for (int m = 0; m < d; ++m) {
        l += lw[static_cast<std::size_t>(k[m])];
        prod *= k[m];
      }
      if (nu_d != 0.0 && prod > 0) l += nu_d * prod;
      table_[i] = l;
      mx = std::max(mx, l);
      for (int m = 0; m < d && ++k[m] > K; ++m) k[m] = 0;
    }
    double z = 0.0;
    for (double l : table_) z += std::exp(l - mx);
    log_z_ = mx + std::log(z);
    tail_ = std::exp(std::log(static_cast<double>(d)) + d * A + stats::log_poisson_upper_tail(K + 1, A) - log_z_);
    if (tail_ <= trunc.tol || K >= trunc.max_K) break;
    K = next_K(K);
  }
  K_ = K;
  for (double& l : table_) l = std::exp(l - log_z_);
}

OrientationCounts PiDistribution::counts_of(std::size_t flat) const {
  OrientationCounts c;
  c.dim = d_;
  for (int m = 0; m < d_; ++m) {
    c[m] = static_cast<std::int64_t>(flat % static_cast<std::size_t>(K_ + 1));
    flat /= static_cast<std::size_t>(K_ + 1);
  }
  return c;
}

double PiDistribution::pmf(const OrientationCounts& k) const {
  if (k.dim != d_) throw std::invalid_argument("pi_pmf: dimension mismatch");
  std::size_t flat = 0;
  for (int m = d_ - 1; m >= 0; --m) {
    if (k[m] < 0) throw std::invalid_argument("pi_pmf: negative count");
    if (k[m] > K_) return 0.0;
    flat = flat * static_cast<std::size_t>(K_ + 1) + static_cast<std::size_t>(k[m]);
  }
  return table_[flat];
}

double PiDistribution::interior_mass() const {
  return expectation([](const OrientationCounts& k) { return k.product() > 0 ? 1.0 : 0.0; });
}

double PiDistribution::product_moment() const {
  return expectation([](const OrientationCounts& k) { return static_cast<double>(k.product()); });
}

double PiDistribution::product_moment_tail() const {
  return std::exp(std::log(static_cast<double>(d_)) + d_ * std::log(A_) + d_ * A_ +
                  stats::log_poisson_upper_tail(K_, A_) - log_z_);
}

double pi_pmf(const OrientationCounts& k, double A, double nu_d, TruncationSpec* trunc) {
  PiDistribution pi(k.dim, A, nu_d, trunc ? *trunc : TruncationSpec{});
  if (trunc) {
    trunc->K = pi.K();
    trunc->tail_bound = pi.tail_bound();
  }
  return pi.pmf(k);
}

double pi_interior_mass(double A, double nu_d, int d, TruncationSpec* trunc) {
  PiDistribution pi(d, A, nu_d, trunc ? *trunc : TruncationSpec{});
  if (trunc) {
    trunc->K = pi.K();
    trunc->tail_bound = pi.tail_bound();
  }
  return pi.interior_mass();
}

double pi_product_moment(double A, double nu_d, int d, TruncationSpec* trunc) {
  PiDistribution pi(d, A, nu_d, trunc ? *trunc : TruncationSpec{});
  if (trunc) {
    trunc->K = pi.K();
    trunc->tail_bound = pi.product_moment_tail();
  }
  return pi.product_moment();
}

std::int64_t a_count(int c, int q, int s, std::span<const std::int64_t> theta) {
  check_acount_args(c, q, s, theta.size());
  std::int64_t total = 0;
  for (const SubsetTerm& t : a_count_terms(c, q, s)) {
    std::int64_t p = t.mult;
    for (int j = 0; j < s; ++j)
      if ((t.mask >> j) & 1u) p *= theta[static_cast<std::size_t>(j)];
    total += p;
  }
  return total;
}

std::int64_t a_count_displayed(int c, int q, int s, std::span<const std::int64_t> theta) {
  check_acount_args(c, q, s, theta.size());
  const std::uint32_t fixed = (1u << q) - 1u;
  std::int64_t total = 0;
  for (std::uint32_t F = 0; F < (1u << s); ++F) {
    const int size = std::popcount(F);
    if (size < c - q || size > c || std::popcount(F | fixed) < c) continue;
    std::int64_t p = 1;
    for (int j = 0; j < s; ++j)
      if ((F >> j) & 1u) p *= theta[static_cast<std::size_t>(j)];
    total += p;
  }
  return total;
}

SeriesValue b_sum(int c, double Q, double rate, int q, int s, double nu_c, int d, TruncationSpec trunc) {
  if (!(nu_c < 0)) throw std::invalid_argument("b_sum: nu_c must be negative");
  if (c < 2 || c > s || s > d || d > kMaxDim || q < 0 || q > s)
    throw std::invalid_argument("b_sum: need 2 <= c <= s <= d <= 8 and 0 <= q <= s");
  if (!(Q > 0) || rate < 0) throw std::invalid_argument("b_sum: need Q > 0 and rate >= 0");
  const auto terms = a_count_terms(c, q, s);
  const double scale = nu_c * power_by_multiplication(Q, d - c);
  if (rate == 0.0) {
    std::int64_t empty = 0;
    for (const SubsetTerm& t : terms)
      if (t.mask == 0) empty += t.mult;
    return {std::exp(scale * static_cast<double>(empty)), 0.0, 0};
  }

  const double log_prefactor = rate * (d - c + 1);
  int K = std::max(trunc.K > 0 ? trunc.K : 0, default_truncation_K(rate));
  SeriesValue out;
  for (;;) {
    const std::size_t cells = box_cells(K, s);
    auto lp = log_weights(rate, K);
    for (double& l : lp) l -= rate;
    std::array<int, kMaxDim> n{};
    double sum = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      double l = 0.0;
      for (int m = 0; m < s; ++m) l += lp[static_cast<std::size_t>(n[m])];
      if (l > -745.0) {
        double A = 0.0;
        for (const SubsetTerm& t : terms) {
          double p = static_cast<double>(t.mult);
          for (int j = 0; j < s && p != 0.0; ++j)
            if ((t.mask >> j) & 1u) p *= n[j];
          A += p;
        }
        sum += std::exp(l + scale * A);
      }
      for (int m = 0; m < s && ++n[m] > K; ++m) n[m] = 0;
    }
    out.value = std::exp(log_prefactor) * sum;
    out.tail_bound = std::exp(log_prefactor + std::log(static_cast<double>(s)) + stats::log_poisson_upper_tail(K + 1, rate));
    out.K = K;
    if (out.tail_bound <= trunc.tol * out.value || K >= trunc.max_K) break;
    K = next_K(K);
  }
  return out;
}

RhoBounds rho_bounds(int c, double rate, int p, int d, double nu_c, double b, TruncationSpec trunc) {
  if (p < 0 || p > d) throw std::invalid_argument("rho_bounds: need 0 <= p <= d");
  const SeriesValue num_lo = b_sum(c, 2.0 * b, rate, p, d, nu_c, d, trunc);
  const SeriesValue num_hi = b_sum(c, b, rate, p, d, nu_c, d, trunc);
  const SeriesValue den_hi = b_sum(c, b, rate, 0, d, nu_c, d, trunc);
  const SeriesValue den_lo = b_sum(c, 2.0 * b, rate, 0, d, nu_c, d, trunc);
  RhoBounds r;
  r.lower_raw = num_lo.value / den_hi.value;
  r.upper_raw = num_hi.value / den_lo.value;
  r.lower = num_lo.value / (den_hi.value + den_hi.tail_bound);
  r.upper = (num_hi.value + num_hi.tail_bound) / den_lo.value;
  return r;
}

Rational rho_limit(int d, int c, int k) {
  if (c < 2 || c > d || k < 1 || k > d) throw std::invalid_argument("rho_limit: need 2 <= c <= d, 1 <= k <= d");
  Rational r{static_cast<std::int64_t>(binomial(d - k, d - c + 1)), static_cast<std::int64_t>(binomial(d, d - c + 1))};
  const std::int64_t g = std::gcd(r.num, r.den);
  if (g > 1) {
    r.num /= g;
    r.den /= g;
  }
  return r;
}

Estimate asymptotic_covariance(int i, int j, const ModelConfig& config, BaseMeasure base, CovarianceSpec spec) {
  config.validate();
  if (i < 1 || j < 1 || i > base.orientations || j > base.orientations)
    throw std::invalid_argument("asymptotic_covariance: order exceeds the number of base orientations");
  if (i > j) std::swap(i, j);
  const double M = base_total(config, base);
  const double g1 = power_by_multiplication(2.0 * config.b, config.d - 1);
  if (j == 1) return {g1 * g1 * M, 0.0};
  if (spec.outer < 2 || spec.inner < 1) throw std::invalid_argument("asymptotic_covariance: need outer >= 2, inner >= 1");

  Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i * kMaxDim + j)));
  std::vector<double> values(static_cast<std::size_t>(spec.outer));
  for (auto& v : values) {
    const Facet y = sample_facet(rng, config, base);
    const double rj = reduced_kernel_g1(j, y, config, base, spec.inner, rng).value;
    const double ri = i == 1 ? g1 : reduced_kernel_g1(i, y, config, base, spec.inner, rng).value;
    v = ri * rj;
  }
  const auto s = stats::summarize(values);
  return {M * s.mean, M * std::sqrt(s.variance / static_cast<double>(s.n))};
}

std::vector<Estimate> covariance_matrix(int n, const ModelConfig& config, BaseMeasure base, CovarianceSpec spec) {
  std::vector<Estimate> C(static_cast<std::size_t>(n * n));
  std::vector<std::pair<int, int>> entries;
  for (int i = 1; i <= n; ++i)
    for (int j = i; j <= n; ++j) entries.emplace_back(i, j);
  default_pool().parallel_for(entries.size(), [&](std::size_t e) {
    const auto [i, j] = entries[e];
    const Estimate v = asymptotic_covariance(i, j, config, base, spec);
    C[static_cast<std::size_t>((i - 1) * n + (j - 1))] = v;
    C[static_cast<std::size_t>((j - 1) * n + (i - 1))] = v;
  });
  return C;
}

}  // namespace facetproc
