#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "facetproc/types.hpp"

namespace facetproc {

/// Facets bucketed by orientation, stored as structure-of-arrays so that the
/// per-class kernels can stream one coordinate at a time.
class ClassedPattern {
 public:
  explicit ClassedPattern(int dim);
  ClassedPattern(const FacetPattern& pattern, int dim);

  int dim() const { return dim_; }
  std::size_t size() const { return size_; }
  std::size_t class_size(int axis) const { return columns(axis, 0).size(); }

  void insert(const Facet& f);
  /// Swap-removes facet `index` of class `axis` and returns it.
  Facet remove(int axis, std::size_t index);
  void clear();

  Facet facet(int axis, std::size_t index) const;
  /// Maps a flat index in [0, size()) to (axis, index) in class order.
  std::pair<int, std::size_t> locate(std::size_t flat) const;

  std::span<const double> columns(int axis, int coord) const {
    return coords_[static_cast<std::size_t>(axis * kMaxDim + coord)];
  }
  OrientationCounts counts() const;
  FacetPattern to_pattern() const;

 private:
  int dim_;
  std::size_t size_ = 0;
  std::vector<std::vector<double>> coords_;
};

}  // namespace facetproc
