#include "facetproc/ustats.hpp"

#include <cmath>
#include <stdexcept>

#include "facetproc/geometry.hpp"
#include "facetproc/kernels.hpp"

namespace facetproc {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// One facet from each class axes[0..remaining) intersected with `box`.
double extend_over(const ClassedPattern& p, const IntersectionBox& box, const int* axes, int remaining) {
  if (remaining == 0) return box.measure();
  if (remaining == 1) return simd::extension_sum(box, ClassColumns::of(p, axes[0]));
  const int l = axes[0];
  double s = 0.0;
  for (std::size_t i = 0; i < p.class_size(l); ++i) {
    IntersectionBox next = box;
    if (next.extend(p.facet(l, i))) s += extend_over(p, next, axes + 1, remaining - 1);
  }
  return s;
}

// Calls fn(axes, k) for each ascending k-subset of the axes in `mask`.
template <class Fn>
void for_each_axis_subset(std::uint32_t mask, int d, int k, Fn&& fn) {
  std::array<int, kMaxDim> axes{};
  auto rec = [&](auto&& self, int start, int depth) -> void {
    if (depth == k) {
      fn(axes.data());
      return;
    }
    for (int m = start; m < d; ++m) {
      if (!((mask >> m) & 1u)) continue;
      axes[depth] = m;
      self(self, m + 1, depth + 1);
    }
  };
  rec(rec, 0, 0);
}

}  // namespace

double driver_g(std::span<const Facet> facets, double b) {
  return intersection_measure(facets, b) / factorial(static_cast<int>(facets.size()));
}

OrientationCounts orientation_counts(const FacetPattern& pattern, int d) {
  OrientationCounts c;
  c.dim = d;
  for (const Facet& f : pattern) ++c[f.axis];
  return c;
}

double compute_G_order(const ClassedPattern& p, int j, double b, UStatOptions opts) {
  const int d = p.dim();
  if (j < 1 || j > d) throw std::invalid_argument("compute_G_order: order out of range");
  if (j == 1) return power_by_multiplication(2.0 * b, d - 1) * static_cast<double>(p.size());
  if (j == d && opts.use_product_identity) return static_cast<double>(p.counts().product());

  const std::uint32_t all = (1u << d) - 1u;
  double total = 0.0;
  for_each_axis_subset(all, d, j, [&](const int* axes) {
    for (int k = 0; k < j; ++k)
      if (p.class_size(axes[k]) == 0) return;
    const int l0 = axes[0];
    for (std::size_t i = 0; i < p.class_size(l0); ++i)
      total += extend_over(p, IntersectionBox::of(p.facet(l0, i), b), axes + 1, j - 1);
  });
  return total;
}

UStatVector compute_G(const ClassedPattern& p, double b, UStatOptions opts) {
  UStatVector g;
  g.dim = p.dim();
  for (int j = 1; j <= p.dim(); ++j) g.values[j - 1] = compute_G_order(p, j, b, opts);
  return g;
}

UStatVector compute_G(const FacetPattern& pattern, const ModelConfig& config, UStatOptions opts) {
  return compute_G(ClassedPattern(pattern, config.d), config.b, opts);
}

double insertion_delta(const ClassedPattern& p, const Facet& u, int j, double b, UStatOptions opts) {
  const int d = p.dim();
  if (j < 1 || j > d) throw std::invalid_argument("insertion_delta: order out of range");
  const IntersectionBox box = IntersectionBox::of(u, b);
  if (j == 1) return box.measure();
  if (j == d && opts.use_product_identity) {
    std::int64_t prod = 1;
    for (int m = 0; m < d; ++m)
      if (m != u.axis) prod *= static_cast<std::int64_t>(p.class_size(m));
    return static_cast<double>(prod);
  }
  const std::uint32_t others = ((1u << d) - 1u) & ~(1u << u.axis);
  double total = 0.0;
  for_each_axis_subset(others, d, j - 1, [&](const int* axes) {
    for (int k = 0; k < j - 1; ++k)
      if (p.class_size(axes[k]) == 0) return;
    total += extend_over(p, box, axes, j - 1);
  });
  return total;
}

double log_papangelou(const ClassedPattern& p, const Facet& u, const ModelConfig& config) {
  double s = 0.0;
  for (int j = 1; j <= config.d; ++j) {
    const double nu = config.nu_of(j);
    if (nu != 0.0) s += nu * insertion_delta(p, u, j, config.b);
  }
  return s;
}

Estimate reduced_kernel_g1(int j, const Facet& y, const ModelConfig& config, BaseMeasure base,
                           std::int64_t mc_samples, Rng& rng) {
  if (j < 1 || j > config.d) throw std::invalid_argument("reduced_kernel_g1: order out of range");
  if (j == 1) return {power_by_multiplication(2.0 * config.b, config.d - 1), 0.0};
  if (mc_samples < 2) throw std::invalid_argument("reduced_kernel_g1: need at least 2 samples");

  const double scale = j / factorial(j) * std::pow(base_total(config, base), j - 1);
  std::array<Facet, kMaxDim> tuple{};
  tuple[0] = y;
  double sum = 0.0, sum2 = 0.0;
  for (std::int64_t s = 0; s < mc_samples; ++s) {
    for (int k = 1; k < j; ++k) tuple[k] = sample_facet(rng, config, base);
    const double h = intersection_measure(std::span<const Facet>(tuple.data(), static_cast<std::size_t>(j)), config.b);
    sum += h;
    sum2 += h * h;
  }
  const double n = static_cast<double>(mc_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
  return {scale * mean, scale * std::sqrt(var / n)};
}

std::vector<double> standardize(std::span<const double> G, std::span<const double> means, double a) {
  if (G.size() != means.size()) throw std::invalid_argument("standardize: size mismatch");
  if (!(a > 0.0)) throw std::invalid_argument("standardize: a must be positive");
  std::vector<double> out(G.size());
  for (std::size_t i = 0; i < G.size(); ++i)
    out[i] = (G[i] - means[i]) / std::pow(a, static_cast<double>(i + 1) - 0.5);
  return out;
}

}  // namespace facetproc
