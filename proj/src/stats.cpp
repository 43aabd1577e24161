#include "facetproc/stats.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace facetproc::stats {

Summary summarize(std::span<const double> x) {
  Summary s;
  s.n = x.size();
  if (x.empty()) return s;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  s.mean = mean;
  s.variance = x.size() > 1 ? ss / static_cast<double>(x.size() - 1) : 0.0;
  return s;
}

double covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("covariance: size mismatch");
  if (x.size() < 2) return 0.0;
  const double mx = summarize(x).mean, my = summarize(y).mean;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(x.size() - 1);
}

namespace {

// FFTW planning is not thread safe.
std::mutex g_fftw_mutex;

std::size_t fft_size(std::size_t n) {
  std::size_t m = 1;
  while (m < 2 * n) m <<= 1;
  return m;
}

// Biased autocovariances gamma_0..gamma_{n-1}.
std::vector<double> autocovariance(std::span<const double> x) {
  const std::size_t n = x.size();
  const double mean = summarize(x).mean;
  const std::size_t m = fft_size(n);
  const std::size_t nc = m / 2 + 1;

  std::unique_ptr<double, decltype(&fftw_free)> buf(fftw_alloc_real(m), &fftw_free);
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> spec(fftw_alloc_complex(nc), &fftw_free);
  fftw_plan fwd, inv;
  {
    std::lock_guard lock(g_fftw_mutex);
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(m), buf.get(), spec.get(), FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(m), spec.get(), buf.get(), FFTW_ESTIMATE);
  }
  double* b = buf.get();
  for (std::size_t i = 0; i < n; ++i) b[i] = x[i] - mean;
  std::fill(b + n, b + m, 0.0);
  fftw_execute(fwd);
  fftw_complex* s = spec.get();
  for (std::size_t k = 0; k < nc; ++k) {
    s[k][0] = s[k][0] * s[k][0] + s[k][1] * s[k][1];
    s[k][1] = 0.0;
  }
  fftw_execute(inv);
  std::vector<double> gamma(b, b + n);
  const double scale = 1.0 / (static_cast<double>(m) * static_cast<double>(n));
  for (double& g : gamma) g *= scale;
  {
    std::lock_guard lock(g_fftw_mutex);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  return gamma;
}

}  // namespace

double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  const std::vector<double> gamma = autocovariance(x);
  if (!(gamma[0] > 0.0)) return static_cast<double>(n);
  double tau = -gamma[0];
  for (std::size_t k = 0; k + 1 < n; k += 2) {
    const double pair = gamma[k] + gamma[k + 1];
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau /= gamma[0];
  return std::min(static_cast<double>(n), static_cast<double>(n) / tau);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double kolmogorov_pvalue(double statistic, std::size_t n) {
  const double en = std::sqrt(static_cast<double>(n));
  const double lambda = (en + 0.12 + 0.11 / en) * statistic;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_normal(std::span<const double> x, double mean, double variance) {
  if (x.empty()) throw std::invalid_argument("ks_test_normal: empty sample");
  if (!(variance > 0.0)) throw std::invalid_argument("ks_test_normal: variance must be positive");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(variance);
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf((sorted[i] - mean) / sd);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_pvalue(d, sorted.size()), sorted.size()};
}

double chi_square_sf(double x, int dof) {
  if (dof < 1) throw std::invalid_argument("chi_square_sf: dof must be positive");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double log_poisson_pmf(std::int64_t k, double mean) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (mean == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

double log_poisson_upper_tail(std::int64_t k, double mean) {
  const double kd = static_cast<double>(k);
  if (kd <= mean) return 0.0;
  return -mean + kd - kd * std::log(kd / mean);
}

ChiSquareResult chi_square_poisson(std::span<const std::int64_t> samples, double mean) {
  if (samples.empty()) throw std::invalid_argument("chi_square_poisson: empty sample");
  const double n = static_cast<double>(samples.size());
  const std::int64_t kmax = *std::max_element(samples.begin(), samples.end());
  const std::int64_t top = std::max<std::int64_t>(kmax, static_cast<std::int64_t>(mean + 10.0 * std::sqrt(mean) + 10.0));
  std::vector<double> observed(static_cast<std::size_t>(top + 1), 0.0);
  for (std::int64_t s : samples) observed[static_cast<std::size_t>(s)] += 1.0;
  std::vector<double> expected(observed.size());
  double cum = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    expected[k] = n * std::exp(log_poisson_pmf(static_cast<std::int64_t>(k), mean));
    cum += expected[k];
  }
  expected.back() += std::max(0.0, n - cum);  // upper tail folded into the last bin

  // Pool adjacent bins from both ends until every expected count is >= 5.
  std::vector<double> obs_b, exp_b;
  double eo = 0.0, ee = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    eo += observed[k];
    ee += expected[k];
    if (ee >= 5.0) {
      obs_b.push_back(eo);
      exp_b.push_back(ee);
      eo = ee = 0.0;
    }
  }
  if (ee > 0.0 || eo > 0.0) {
    if (exp_b.empty()) {
      obs_b.push_back(eo);
      exp_b.push_back(ee);
    } else {
      obs_b.back() += eo;
      exp_b.back() += ee;
    }
  }
  ChiSquareResult r;
  for (std::size_t i = 0; i < exp_b.size(); ++i) r.statistic += (obs_b[i] - exp_b[i]) * (obs_b[i] - exp_b[i]) / exp_b[i];
  r.dof = static_cast<int>(exp_b.size()) - 1;
  r.p_value = r.dof >= 1 ? chi_square_sf(r.statistic, r.dof) : 1.0;
  return r;
}

void LogSumExp::add(double t) {
  if (t == -std::numeric_limits<double>::infinity()) return;
  if (max_ == kEmpty) {
    max_ = t;
    sum_ = 1.0;
  } else if (t <= max_) {
    sum_ += std::exp(t - max_);
  } else {
    sum_ = sum_ * std::exp(max_ - t) + 1.0;
    max_ = t;
  }
}

void LogSumExp::add_scaled(const LogSumExp& o) {
  if (max_ == kEmpty) {
    *this = o;
  } else if (o.max_ <= max_) {
    sum_ += o.sum_ * std::exp(o.max_ - max_);
  } else {
    sum_ = sum_ * std::exp(max_ - o.max_) + o.sum_;
    max_ = o.max_;
  }
}

double LogSumExp::log_value() const {
  return max_ == kEmpty ? -std::numeric_limits<double>::infinity() : max_ + std::log(sum_);
}

double LogSumExp::value() const { return max_ == kEmpty ? 0.0 : std::exp(max_) * sum_; }

}  // namespace facetproc::stats
