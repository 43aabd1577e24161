#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "facetproc/classed_pattern.hpp"
#include "facetproc/model.hpp"
#include "facetproc/types.hpp"

namespace facetproc {

/// G_1..G_d of one pattern (values[j-1] = G_j).
struct UStatVector {
  int dim = 0;
  std::array<double, kMaxDim> values{};
  std::optional<std::array<double, kMaxDim>> standardized;

  double G(int j) const { return values[static_cast<std::size_t>(j - 1)]; }
};

struct UStatOptions {
  /// G_d = prod theta_i (valid for centres inside the window).
  bool use_product_identity = true;
};

/// g^{(j)}(x_1..x_j) = H^{d-j}(∩ x_i) / j!.
double driver_g(std::span<const Facet> facets, double b);

OrientationCounts orientation_counts(const FacetPattern& pattern, int d);

/// G_j of a classed pattern: sum over unordered j-subsets with distinct
/// orientations of H^{d-j}(∩). Enumerates orientation subsets first, then
/// one facet per class; the last class goes through the SIMD kernel.
double compute_G_order(const ClassedPattern& pattern, int j, double b, UStatOptions opts = {});

UStatVector compute_G(const ClassedPattern& pattern, double b, UStatOptions opts = {});
UStatVector compute_G(const FacetPattern& pattern, const ModelConfig& config, UStatOptions opts = {});

/// G_j(x ∪ {u}) - G_j(x) for u not in x.
double insertion_delta(const ClassedPattern& pattern, const Facet& u, int j, double b, UStatOptions opts = {});

/// log lambda*_1(u; x) = sum_j nu_j (G_j(x ∪ u) - G_j(x)).
double log_papangelou(const ClassedPattern& pattern, const Facet& u, const ModelConfig& config);

/// Monte Carlo estimate of g_1^{(j)}(y) = j ∫ g^{(j)}(y, x_1..x_{j-1}) d base^{j-1}.
/// Exact for j = 1.
Estimate reduced_kernel_g1(int j, const Facet& y, const ModelConfig& config, BaseMeasure base,
                           std::int64_t mc_samples, Rng& rng);

/// (G_j - mean_j) / a^{j - 1/2}, j = 1..G.size().
std::vector<double> standardize(std::span<const double> G, std::span<const double> means, double a);

}  // namespace facetproc
