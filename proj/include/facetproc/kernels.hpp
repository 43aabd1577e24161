#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "facetproc/classed_pattern.hpp"
#include "facetproc/types.hpp"

namespace facetproc {

/// Running intersection of facets with pairwise distinct orientations.
/// cmin/cmax track the extreme centre coordinates over the facets so far;
/// fixed[m] is the level of the facet normal to e_{m+1}, when present.
struct IntersectionBox {
  int dim = 0;
  double b = 0.0;
  std::uint32_t fixed_mask = 0;
  std::array<double, kMaxDim> cmin{};
  std::array<double, kMaxDim> cmax{};
  std::array<double, kMaxDim> fixed{};

  static IntersectionBox of(const Facet& f, double b);
  bool is_fixed(int m) const { return (fixed_mask >> m) & 1u; }
  /// Adds a facet; false when the intersection becomes empty.
  bool extend(const Facet& f);
  /// prod over free coordinates of max(0, 2b - (cmax - cmin)).
  double measure() const;
};

/// One orientation class as column pointers (coord[m][i] = centre m of facet i).
struct ClassColumns {
  std::array<const double*, kMaxDim> coord{};
  std::size_t size = 0;
  int axis = 0;

  static ClassColumns of(const ClassedPattern& p, int axis);
};

namespace simd {

enum class Isa { scalar, avx2, neon };

std::string_view name(Isa isa);
bool available(Isa isa);
/// Best available ISA unless overridden by set_isa() or FACETPROC_ISA={scalar,avx2,neon}.
Isa active();
void set_isa(Isa isa);

/// Sum over the facets of `cls` of the measure of box ∩ facet. The class axis
/// must be free in the box. Per-facet values are bitwise identical across ISAs;
/// only the summation order differs.
double extension_sum(const IntersectionBox& box, const ClassColumns& cls);

double extension_sum_scalar(const IntersectionBox& box, const ClassColumns& cls);
#if defined(__x86_64__) || defined(_M_X64)
double extension_sum_avx2(const IntersectionBox& box, const ClassColumns& cls);
#endif
#if defined(__aarch64__)
double extension_sum_neon(const IntersectionBox& box, const ClassColumns& cls);
#endif

}  // namespace simd
}  // namespace facetproc
