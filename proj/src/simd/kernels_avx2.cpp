#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace cablerender::simd::detail {
namespace {

inline double clamp_tail(double v, double lo, double hi) noexcept {
  const double a = v > lo ? v : lo;
  return a < hi ? a : hi;
}

inline double hmax(__m256d v) noexcept {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  double m = lanes[0];
  for (int k = 1; k < 4; ++k) m = lanes[k] > m ? lanes[k] : m;
  return m;
}

void clamp(const double* in, const double* lo, const double* hi, double* out,
           std::size_t n) noexcept {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(in + i);
    const __m256d a = _mm256_max_pd(v, _mm256_loadu_pd(lo + i));
    _mm256_storeu_pd(out + i, _mm256_min_pd(a, _mm256_loadu_pd(hi + i)));
  }
  for (; i < n; ++i) out[i] = clamp_tail(in[i], lo[i], hi[i]);
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                           _mm256_loadu_pd(b + i)));
  }
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void sub_combination3(const double* base, const double* r0, const double* r1,
                      const double* r2, double c0, double c1, double c2,
                      double* out, std::size_t n) noexcept {
  const __m256d v0 = _mm256_set1_pd(c0);
  const __m256d v1 = _mm256_set1_pd(c1);
  const __m256d v2 = _mm256_set1_pd(c2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = _mm256_add_pd(_mm256_mul_pd(v0, _mm256_loadu_pd(r0 + i)),
                              _mm256_mul_pd(v1, _mm256_loadu_pd(r1 + i)));
    s = _mm256_add_pd(s, _mm256_mul_pd(v2, _mm256_loadu_pd(r2 + i)));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(base + i), s));
  }
  for (; i < n; ++i) {
    out[i] = base[i] - ((c0 * r0[i] + c1 * r1[i]) + c2 * r2[i]);
  }
}

double box_correction_step(const double* x, double* corr, double* y,
                           const double* lo, const double* hi,
                           std::size_t n) noexcept {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d disp4 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d z =
        _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(corr + i));
    const __m256d yn = _mm256_min_pd(
        _mm256_max_pd(z, _mm256_loadu_pd(lo + i)), _mm256_loadu_pd(hi + i));
    _mm256_storeu_pd(corr + i, _mm256_sub_pd(z, yn));
    const __m256d d =
        _mm256_andnot_pd(sign, _mm256_sub_pd(yn, _mm256_loadu_pd(y + i)));
    disp4 = _mm256_max_pd(d, disp4);
    _mm256_storeu_pd(y + i, yn);
  }
  double disp = hmax(disp4);
  for (; i < n; ++i) {
    const double z = x[i] + corr[i];
    const double yn = clamp_tail(z, lo[i], hi[i]);
    corr[i] = z - yn;
    const double d = std::fabs(yn - y[i]);
    disp = d > disp ? d : disp;
    y[i] = yn;
  }
  return disp;
}

}  // namespace

const KernelTable kAvx2Table{Isa::Avx2, &clamp, &dot, &sub_combination3,
                             &box_correction_step};

}  // namespace cablerender::simd::detail
