#include "facetproc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace facetproc {

Facet make_facet(std::span<const double> center, int axis) {
  if (center.empty() || center.size() > static_cast<std::size_t>(kMaxDim))
    throw std::invalid_argument("make_facet: dimension must be in [1, 8]");
  const int d = static_cast<int>(center.size());
  if (axis < 0 || axis >= d) throw std::invalid_argument("make_facet: axis out of range");
  Facet f;
  f.dim = d;
  f.axis = axis;
  std::copy(center.begin(), center.end(), f.center.begin());
  return f;
}

Facet make_facet(std::initializer_list<double> center, int axis) {
  return make_facet(std::span<const double>(center.begin(), center.size()), axis);
}

std::int64_t OrientationCounts::total() const {
  std::int64_t s = 0;
  for (int i = 0; i < dim; ++i) s += theta[i];
  return s;
}

std::int64_t OrientationCounts::product() const {
  std::int64_t p = 1;
  for (int i = 0; i < dim; ++i) p *= theta[i];
  return p;
}

double power_by_multiplication(double base, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= base;
  return r;
}

bool in_window(const Facet& f, double b) {
  for (int m = 0; m < f.dim; ++m)
    if (!(f.center[m] >= 0.0 && f.center[m] <= b)) return false;
  return true;
}

double intersection_measure(std::span<const Facet> facets, double b) {
  if (facets.empty()) throw std::invalid_argument("intersection_measure: empty facet list");
  const int d = facets.front().dim;
  if (facets.size() > static_cast<std::size_t>(d))
    throw std::invalid_argument("intersection_measure: more facets than dimensions");

  std::uint32_t used = 0;
  for (const Facet& f : facets) {
    if (f.dim != d) throw std::invalid_argument("intersection_measure: mixed dimensions");
    const std::uint32_t bit = 1u << f.axis;
    if (used & bit) return 0.0;
    used |= bit;
  }

  for (std::size_t i = 0; i < facets.size(); ++i) {
    const int l = facets[i].axis;
    for (std::size_t k = 0; k < facets.size(); ++k) {
      if (k == i) continue;
      if (std::abs(facets[i].center[l] - facets[k].center[l]) > b) return 0.0;
    }
  }

  double measure = 1.0;
  for (int m = 0; m < d; ++m) {
    if (used & (1u << m)) continue;
    double lo = facets.front().center[m];
    double hi = lo;
    for (const Facet& f : facets) {
      lo = std::min(lo, f.center[m]);
      hi = std::max(hi, f.center[m]);
    }
    measure *= std::max(0.0, 2.0 * b - (hi - lo));
  }
  return measure;
}

bool check_intersection_bounds(std::span<const Facet> facets, double b) {
  if (facets.empty()) throw std::invalid_argument("check_intersection_bounds: empty facet list");
  std::uint32_t used = 0;
  for (const Facet& f : facets) {
    if (used & (1u << f.axis))
      throw std::invalid_argument("check_intersection_bounds: orientations must be distinct");
    used |= 1u << f.axis;
  }
  const int k = facets.front().dim - static_cast<int>(facets.size());
  const double h = intersection_measure(facets, b);
  return power_by_multiplication(b, k) <= h && h <= power_by_multiplication(2.0 * b, k);
}

}  // namespace facetproc
