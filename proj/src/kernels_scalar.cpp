#include <algorithm>
#include <cmath>

#include "facetproc/kernels.hpp"

namespace facetproc {

IntersectionBox IntersectionBox::of(const Facet& f, double b) {
  IntersectionBox box;
  box.dim = f.dim;
  box.b = b;
  box.fixed_mask = 1u << f.axis;
  box.fixed[f.axis] = f.center[f.axis];
  for (int m = 0; m < f.dim; ++m) box.cmin[m] = box.cmax[m] = f.center[m];
  return box;
}

bool IntersectionBox::extend(const Facet& f) {
  const int l = f.axis;
  if (is_fixed(l)) return false;
  const double v = f.center[l];
  if (v - cmin[l] > b || cmax[l] - v > b) return false;
  for (int m = 0; m < dim; ++m) {
    if (m == l) continue;
    if (is_fixed(m)) {
      if (std::abs(fixed[m] - f.center[m]) > b) return false;
    } else if (2.0 * b - (std::max(cmax[m], f.center[m]) - std::min(cmin[m], f.center[m])) < 0.0) {
      return false;
    }
  }
  for (int m = 0; m < dim; ++m) {
    cmin[m] = std::min(cmin[m], f.center[m]);
    cmax[m] = std::max(cmax[m], f.center[m]);
  }
  fixed_mask |= 1u << l;
  fixed[l] = v;
  return true;
}

double IntersectionBox::measure() const {
  double r = 1.0;
  for (int m = 0; m < dim; ++m)
    if (!is_fixed(m)) r *= std::max(0.0, 2.0 * b - (cmax[m] - cmin[m]));
  return r;
}

ClassColumns ClassColumns::of(const ClassedPattern& p, int axis) {
  ClassColumns c;
  c.axis = axis;
  c.size = p.class_size(axis);
  for (int m = 0; m < p.dim(); ++m) c.coord[m] = p.columns(axis, m).data();
  return c;
}

namespace simd {

double extension_sum_scalar(const IntersectionBox& box, const ClassColumns& cls) {
  const int d = box.dim;
  const int l = cls.axis;
  const double b = box.b;
  const double two_b = 2.0 * b;
  double sum = 0.0;
  for (std::size_t i = 0; i < cls.size; ++i) {
    const double vl = cls.coord[l][i];
    bool ok = (vl - box.cmin[l] <= b) && (box.cmax[l] - vl <= b);
    double prod = 1.0;
    for (int m = 0; m < d; ++m) {
      if (m == l) continue;
      const double v = cls.coord[m][i];
      if (box.is_fixed(m)) {
        ok = ok && (std::abs(box.fixed[m] - v) <= b);
      } else {
        const double w = two_b - (std::max(box.cmax[m], v) - std::min(box.cmin[m], v));
        ok = ok && (w >= 0.0);
        prod *= w;
      }
    }
    if (ok) sum += prod;
  }
  return sum;
}

}  // namespace simd
}  // namespace facetproc
