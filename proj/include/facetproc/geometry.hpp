#pragma once

#include <span>

#include "facetproc/types.hpp"

namespace facetproc {

/// Hausdorff measure H^{d-j} of the intersection of j = facets.size() facets.
///
/// Zero when two facets share an orientation. Otherwise the product over the
/// coordinates not fixed by any facet of max(0, 2b - (max centre - min centre)),
/// provided every facet's fixed coordinate lies within b of all other centres
/// in that coordinate (zero otherwise). Valid for arbitrary finite centres.
/// Throws std::invalid_argument for an empty list, more than d facets or mixed dimensions.
double intersection_measure(std::span<const Facet> facets, double b);

/// b^{d-c} <= H^{d-c} <= (2b)^{d-c} for c facets with pairwise distinct orientations.
/// Throws std::invalid_argument when orientations repeat.
bool check_intersection_bounds(std::span<const Facet> facets, double b);

/// b^k and (2b)^k by repeated multiplication (matches the rounding of the measure).
double power_by_multiplication(double base, int k);

bool in_window(const Facet& f, double b);

}  // namespace facetproc
