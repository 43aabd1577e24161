// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "facetproc/kernels.hpp"

namespace facetproc::simd {

double extension_sum_avx2(const IntersectionBox& box, const ClassColumns& cls) {
  const int d = box.dim;
  const int l = cls.axis;
  const double b = box.b;
  const double two_b = 2.0 * b;

  const __m256d vb = _mm256_set1_pd(b);
  const __m256d v2b = _mm256_set1_pd(two_b);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d cmin_l = _mm256_set1_pd(box.cmin[l]);
  const __m256d cmax_l = _mm256_set1_pd(box.cmax[l]);

  __m256d acc = zero;
  std::size_t i = 0;
  for (; i + 4 <= cls.size; i += 4) {
    const __m256d vl = _mm256_loadu_pd(cls.coord[l] + i);
    __m256d ok = _mm256_and_pd(_mm256_cmp_pd(_mm256_sub_pd(vl, cmin_l), vb, _CMP_LE_OQ),
                               _mm256_cmp_pd(_mm256_sub_pd(cmax_l, vl), vb, _CMP_LE_OQ));
    __m256d prod = one;
    for (int m = 0; m < d; ++m) {
      if (m == l) continue;
      const __m256d v = _mm256_loadu_pd(cls.coord[m] + i);
      if (box.is_fixed(m)) {
        const __m256d diff = _mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_set1_pd(box.fixed[m]), v));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(diff, vb, _CMP_LE_OQ));
      } else {
        const __m256d hi = _mm256_max_pd(_mm256_set1_pd(box.cmax[m]), v);
        const __m256d lo = _mm256_min_pd(_mm256_set1_pd(box.cmin[m]), v);
        const __m256d w = _mm256_sub_pd(v2b, _mm256_sub_pd(hi, lo));
        ok = _mm256_and_pd(ok, _mm256_cmp_pd(w, zero, _CMP_GE_OQ));
        prod = _mm256_mul_pd(prod, w);
      }
    }
    acc = _mm256_add_pd(acc, _mm256_and_pd(ok, prod));
  }

  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);

  if (i < cls.size) {
    ClassColumns tail = cls;
    for (int m = 0; m < d; ++m) tail.coord[m] = cls.coord[m] + i;
    tail.size = cls.size - i;
    sum += extension_sum_scalar(box, tail);
  }
  return sum;
}

}  // namespace facetproc::simd
