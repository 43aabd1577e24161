#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <random>
#include <vector>

namespace facetproc {

inline constexpr int kMaxDim = 8;

using Rng = std::mt19937_64;

/// An axis-aligned facet of half-side b centred at `center`:
///   { x : x[axis] = center[axis], |x[m] - center[m]| <= b for m != axis }.
/// `axis` is 0-based; the normal is e_{axis+1}.
struct Facet {
  std::array<double, kMaxDim> center{};
  int axis = 0;
  int dim = 0;

  friend bool operator==(const Facet&, const Facet&) = default;
};

Facet make_facet(std::span<const double> center, int axis);
Facet make_facet(std::initializer_list<double> center, int axis);

/// Finite facet configuration. Storage order is bookkeeping only.
using FacetPattern = std::vector<Facet>;

/// theta_i = number of facets with normal e_{i+1}.
struct OrientationCounts {
  int dim = 0;
  std::array<std::int64_t, kMaxDim> theta{};

  std::int64_t operator[](int i) const { return theta[static_cast<std::size_t>(i)]; }
  std::int64_t& operator[](int i) { return theta[static_cast<std::size_t>(i)]; }
  std::int64_t total() const;
  std::int64_t product() const;

  friend bool operator==(const OrientationCounts&, const OrientationCounts&) = default;
};

/// Value with Monte Carlo standard error.
struct Estimate {
  double value = 0.0;
  double stderr = 0.0;
};

}  // namespace facetproc
