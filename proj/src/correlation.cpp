#include "facetproc/correlation.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "facetproc/analytic.hpp"
#include "facetproc/classed_pattern.hpp"
#include "facetproc/geometry.hpp"
#include "facetproc/stats.hpp"
#include "facetproc/ustats.hpp"

namespace facetproc {
namespace {

using Signature = std::array<int, kMaxDim>;

// Elementary symmetric polynomial e_c(v_1..v_d).
double elementary_symmetric(const std::array<double, kMaxDim>& v, int d, int c) {
  std::array<double, kMaxDim + 1> e{};
  e[0] = 1.0;
  for (int i = 0; i < d; ++i)
    for (int k = std::min(c, i + 1); k >= 1; --k) e[static_cast<std::size_t>(k)] += e[static_cast<std::size_t>(k - 1)] * v[i];
  return e[static_cast<std::size_t>(c)];
}

Signature signature_of(std::span<const Facet> x, int d) {
  Signature m{};
  for (const Facet& f : x) {
    if (f.dim != d) throw std::invalid_argument("correlation: facet dimension mismatch");
    ++m[static_cast<std::size_t>(f.axis)];
  }
  return m;
}

}  // namespace

struct CorrelationEstimator::Plan {
  struct Stratum {
    std::array<int, kMaxDim> theta{};
    double P = 0.0;
    double share = 0.0;
  };
  int targets = 1;
  std::vector<Stratum> sampled;
  std::array<double, 2> exact_part{};
  std::array<double, 2> trunc{};
  std::size_t strata = 0;
  int K = 0;
};

CorrelationEstimator::CorrelationEstimator(ModelConfig config, int c, RhoOptions opts)
    : config_(std::move(config)), c_(c), opts_(opts) {
  config_.validate();
  if (c < 2 || c > config_.d) throw std::invalid_argument("correlation: need 2 <= c <= d");
  nu_c_ = config_.nu_of(c);
  if (!(nu_c_ < 0)) throw std::invalid_argument("correlation: nu_c must be negative");
  for (int j = 1; j <= config_.d; ++j)
    if (j != c && config_.nu_of(j) != 0.0) throw std::invalid_argument("correlation: only nu_c may be non-zero");
  rate_ = pi_rate(config_);
}

CorrelationEstimator::~CorrelationEstimator() = default;

const CorrelationEstimator::Plan& CorrelationEstimator::plan(const Signature& m0, const std::optional<Signature>& m1) {
  std::vector<int> key(m0.begin(), m0.end());
  if (m1) key.insert(key.end(), m1->begin(), m1->end());
  else key.push_back(-1);
  std::lock_guard lock(mutex_);
  if (auto it = plans_.find(key); it != plans_.end()) return *it->second;

  const int d = config_.d;
  const int T = m1 ? 2 : 1;
  const std::array<Signature, 2> m{m0, m1 ? *m1 : Signature{}};
  const double lo_scale = nu_c_ * power_by_multiplication(2.0 * config_.b, d - c_);
  const double hi_scale = nu_c_ * power_by_multiplication(config_.b, d - c_);
  const double prune = exact() ? 0.0 : opts_.prune_rel;

  struct Cell {
    std::array<double, 2> lo, hi;
    std::array<bool, 2> det;
  };
  auto evaluate_cell = [&](const std::array<int, kMaxDim>& theta) {
    Cell cell{};
    for (int t = 0; t < T; ++t) {
      std::array<double, kMaxDim> v{};
      for (int i = 0; i < d; ++i) v[i] = theta[i] + m[t][i];
      const double count = elementary_symmetric(v, d, c_);
      cell.det[t] = count == 0.0 || c_ == d;
      cell.lo[t] = std::exp((c_ == d ? hi_scale : lo_scale) * count);
      cell.hi[t] = std::exp(hi_scale * count);
    }
    return cell;
  };

  auto p = std::make_unique<Plan>();
  p->targets = T;
  int K = std::max(1, default_truncation_K(rate_));
  std::vector<double> lp;
  std::array<double, 2> L{};
  double tail = 0.0;
  std::size_t cells = 0;
  for (;;) {
    const double c_cells = std::pow(static_cast<double>(K + 1), d);
    if (c_cells > 4e7) throw std::invalid_argument("correlation: count box too large");
    cells = static_cast<std::size_t>(c_cells);
    lp.resize(static_cast<std::size_t>(K + 1));
    for (int k = 0; k <= K; ++k) lp[static_cast<std::size_t>(k)] = stats::log_poisson_pmf(k, rate_);
    L = {};
    std::array<int, kMaxDim> theta{};
    for (std::size_t i = 0; i < cells; ++i) {
      double l = 0.0;
      for (int a = 0; a < d; ++a) l += lp[static_cast<std::size_t>(theta[a])];
      if (l > -745.0) {
        const Cell cell = evaluate_cell(theta);
        for (int t = 0; t < T; ++t) L[t] += std::exp(l) * cell.lo[t];
      }
      for (int a = 0; a < d && ++theta[a] > K; ++a) theta[a] = 0;
    }
    tail = d * std::exp(stats::log_poisson_upper_tail(K + 1, rate_));
    const double Lmin = T == 2 ? std::min(L[0], L[1]) : L[0];
    if (tail <= opts_.tail_rel * Lmin || K >= opts_.max_K) break;
    K = K + std::max(5, K / 4);
  }
  p->K = K;

  double width_total = 0.0;
  std::array<int, kMaxDim> theta{};
  for (std::size_t i = 0; i < cells; ++i) {
    double l = 0.0;
    for (int a = 0; a < d; ++a) l += lp[static_cast<std::size_t>(theta[a])];
    const double P = std::exp(l);
    const Cell cell = evaluate_cell(theta);
    bool keep = false, all_det = true;
    for (int t = 0; t < T; ++t) {
      keep = keep || P * cell.hi[t] >= prune * L[t];
      all_det = all_det && cell.det[t];
    }
    if (!keep) {
      for (int t = 0; t < T; ++t) p->trunc[t] += P * cell.hi[t];
    } else {
      ++p->strata;
      if (all_det) {
        for (int t = 0; t < T; ++t) p->exact_part[t] += P * cell.hi[t];
      } else {
        double w = 0.0;
        for (int t = 0; t < T; ++t) w = std::max(w, P * (cell.hi[t] - cell.lo[t]));
        p->sampled.push_back({theta, P, w});
        width_total += w;
      }
    }
    for (int a = 0; a < d && ++theta[a] > K; ++a) theta[a] = 0;
  }
  for (auto& s : p->sampled) s.share = width_total > 0 ? s.share / width_total : 0.0;
  for (int t = 0; t < T; ++t) p->trunc[t] += tail;

  auto& slot = plans_[key];
  slot = std::move(p);
  return *slot;
}

RhoEstimate CorrelationEstimator::rho(std::span<const Facet> x, Rng& rng) {
  const Signature m = signature_of(x, config_.d);
  const Plan& pl = plan(m, Signature{});
  RhoEstimate r;
  r.exact = pl.sampled.empty();
  r.strata = pl.strata;
  r.sampled_strata = pl.sampled.size();

  std::array<double, 2> value = pl.exact_part;
  std::array<double, 2> var{};
  double cov = 0.0;
  const int d = config_.d;
  for (const auto& s : pl.sampled) {
    const std::int64_t M = std::max<std::int64_t>(2, std::llround(static_cast<double>(opts_.reps) * s.share));
    double mean0 = 0, mean1 = 0, m2_0 = 0, m2_1 = 0, c01 = 0;
    for (std::int64_t k = 0; k < M; ++k) {
      ClassedPattern pat(d);
      for (int a = 0; a < d; ++a)
        for (int n = 0; n < s.theta[a]; ++n) pat.insert(sample_center(rng, config_, a));
      const double g_den = compute_G_order(pat, c_, config_.b);
      double g_num = g_den;
      for (const Facet& f : x) {
        g_num += insertion_delta(pat, f, c_, config_.b);
        pat.insert(f);
      }
      const double v0 = std::exp(nu_c_ * g_num), v1 = std::exp(nu_c_ * g_den);
      const double kk = static_cast<double>(k + 1);
      const double d0 = v0 - mean0, d1 = v1 - mean1;
      mean0 += d0 / kk;
      mean1 += d1 / kk;
      m2_0 += d0 * (v0 - mean0);
      m2_1 += d1 * (v1 - mean1);
      c01 += d0 * (v1 - mean1);
    }
    const double Md = static_cast<double>(M);
    value[0] += s.P * mean0;
    value[1] += s.P * mean1;
    var[0] += s.P * s.P * m2_0 / (Md - 1) / Md;
    var[1] += s.P * s.P * m2_1 / (Md - 1) / Md;
    cov += s.P * s.P * c01 / (Md - 1) / Md;
    r.draws += M;
  }

  const double N = value[0], D = value[1];
  r.numerator = N;
  r.denominator = D;
  r.value = N / D;
  const double R = r.value;
  r.stderr = std::sqrt(std::max(0.0, var[0] - 2.0 * R * cov + R * R * var[1])) / D;
  const double lo = N / (D + pl.trunc[1]);
  const double hi = (N + pl.trunc[0]) / D;
  r.truncation_error = std::max(R - lo, hi - R) + 1e-13 * std::abs(R);
  r.den_rel_stderr = std::sqrt(var[1]) / D;
  if (r.den_rel_stderr > opts_.warn_rel_stderr) {
    std::ostringstream msg;
    msg << "denominator relative stderr " << r.den_rel_stderr << " exceeds " << opts_.warn_rel_stderr
        << "; prefer rho_bounds at this rate";
    r.warnings.push_back(msg.str());
  }
  return r;
}

ExpectationEstimate CorrelationEstimator::expectation(std::span<const Facet> x, Rng& rng, std::int64_t reps, bool roulette) {
  const Signature m = signature_of(x, config_.d);
  const Plan& pl = plan(m, std::nullopt);
  ExpectationEstimate e;
  e.value = pl.exact_part[0];
  e.truncation = pl.trunc[0];
  e.exact = pl.sampled.empty();
  const int d = config_.d;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& s : pl.sampled) {
    const double mu = static_cast<double>(reps) * s.share;
    std::int64_t M;
    double w = s.P;
    if (roulette && mu < 1.0) {
      if (unif(rng) >= mu) continue;
      M = 1;
      w = s.P / mu;
    } else {
      M = std::max<std::int64_t>(roulette ? 1 : 2, std::llround(mu));
    }
    double mean = 0, m2 = 0;
    for (std::int64_t k = 0; k < M; ++k) {
      ClassedPattern pat(d);
      for (int a = 0; a < d; ++a)
        for (int n = 0; n < s.theta[a]; ++n) pat.insert(sample_center(rng, config_, a));
      double g = compute_G_order(pat, c_, config_.b);
      for (const Facet& f : x) {
        g += insertion_delta(pat, f, c_, config_.b);
        pat.insert(f);
      }
      const double v = std::exp(nu_c_ * g);
      const double dv = v - mean;
      mean += dv / static_cast<double>(k + 1);
      m2 += dv * (v - mean);
    }
    e.value += w * mean;
    if (M >= 2) e.variance += w * w * m2 / static_cast<double>(M - 1) / static_cast<double>(M);
  }
  return e;
}

const ExpectationEstimate& CorrelationEstimator::denominator(Rng& rng) {
  if (!den_) den_ = expectation({}, rng, opts_.reps, false);
  return *den_;
}

RhoEstimate rho_mc_estimate(std::span<const Facet> x, int c, const ModelConfig& config, std::int64_t reps, Rng& rng) {
  RhoOptions opts;
  opts.reps = reps;
  CorrelationEstimator est(config, c, opts);
  return est.rho(x, rng);
}

}  // namespace facetproc
