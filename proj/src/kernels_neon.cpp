#include <arm_neon.h>

#include "facetproc/kernels.hpp"

namespace facetproc::simd {

double extension_sum_neon(const IntersectionBox& box, const ClassColumns& cls) {
  const int d = box.dim;
  const int l = cls.axis;
  const double b = box.b;

  const float64x2_t vb = vdupq_n_f64(b);
  const float64x2_t v2b = vdupq_n_f64(2.0 * b);
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t cmin_l = vdupq_n_f64(box.cmin[l]);
  const float64x2_t cmax_l = vdupq_n_f64(box.cmax[l]);

  float64x2_t acc = zero;
  std::size_t i = 0;
  for (; i + 2 <= cls.size; i += 2) {
    const float64x2_t vl = vld1q_f64(cls.coord[l] + i);
    uint64x2_t ok = vandq_u64(vcleq_f64(vsubq_f64(vl, cmin_l), vb), vcleq_f64(vsubq_f64(cmax_l, vl), vb));
    float64x2_t prod = vdupq_n_f64(1.0);
    for (int m = 0; m < d; ++m) {
      if (m == l) continue;
      const float64x2_t v = vld1q_f64(cls.coord[m] + i);
      if (box.is_fixed(m)) {
        const float64x2_t diff = vabsq_f64(vsubq_f64(vdupq_n_f64(box.fixed[m]), v));
        ok = vandq_u64(ok, vcleq_f64(diff, vb));
      } else {
        const float64x2_t hi = vmaxq_f64(vdupq_n_f64(box.cmax[m]), v);
        const float64x2_t lo = vminq_f64(vdupq_n_f64(box.cmin[m]), v);
        const float64x2_t w = vsubq_f64(v2b, vsubq_f64(hi, lo));
        ok = vandq_u64(ok, vcgeq_f64(w, zero));
        prod = vmulq_f64(prod, w);
      }
    }
    acc = vaddq_f64(acc, vbslq_f64(ok, prod, zero));
  }
  double sum = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);

  if (i < cls.size) {
    ClassColumns tail = cls;
    for (int m = 0; m < d; ++m) tail.coord[m] = cls.coord[m] + i;
    tail.size = cls.size - i;
    sum += extension_sum_scalar(box, tail);
  }
  return sum;
}

}  // namespace facetproc::simd
