#include "facetproc/classed_pattern.hpp"

#include <stdexcept>

namespace facetproc {

ClassedPattern::ClassedPattern(int dim) : dim_(dim), coords_(static_cast<std::size_t>(kMaxDim * kMaxDim)) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("ClassedPattern: dimension out of range");
}

ClassedPattern::ClassedPattern(const FacetPattern& pattern, int dim) : ClassedPattern(dim) {
  for (const Facet& f : pattern) insert(f);
}

void ClassedPattern::insert(const Facet& f) {
  if (f.dim != dim_) throw std::invalid_argument("ClassedPattern::insert: dimension mismatch");
  for (int m = 0; m < dim_; ++m) coords_[static_cast<std::size_t>(f.axis * kMaxDim + m)].push_back(f.center[m]);
  ++size_;
}

Facet ClassedPattern::remove(int axis, std::size_t index) {
  Facet f = facet(axis, index);
  for (int m = 0; m < dim_; ++m) {
    auto& col = coords_[static_cast<std::size_t>(axis * kMaxDim + m)];
    col[index] = col.back();
    col.pop_back();
  }
  --size_;
  return f;
}

void ClassedPattern::clear() {
  for (auto& col : coords_) col.clear();
  size_ = 0;
}

Facet ClassedPattern::facet(int axis, std::size_t index) const {
  Facet f;
  f.dim = dim_;
  f.axis = axis;
  for (int m = 0; m < dim_; ++m) f.center[m] = columns(axis, m)[index];
  return f;
}

std::pair<int, std::size_t> ClassedPattern::locate(std::size_t flat) const {
  for (int axis = 0; axis < dim_; ++axis) {
    const std::size_t n = class_size(axis);
    if (flat < n) return {axis, flat};
    flat -= n;
  }
  throw std::out_of_range("ClassedPattern::locate");
}

OrientationCounts ClassedPattern::counts() const {
  OrientationCounts c;
  c.dim = dim_;
  for (int axis = 0; axis < dim_; ++axis) c[axis] = static_cast<std::int64_t>(class_size(axis));
  return c;
}

FacetPattern ClassedPattern::to_pattern() const {
  FacetPattern out;
  out.reserve(size_);
  for (int axis = 0; axis < dim_; ++axis)
    for (std::size_t i = 0; i < class_size(axis); ++i) out.push_back(facet(axis, i));
  return out;
}

}  // namespace facetproc
