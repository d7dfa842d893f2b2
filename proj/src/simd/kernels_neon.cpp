#include <arm_neon.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace cablerender::simd::detail {
namespace {

inline double clamp_tail(double v, double lo, double hi) noexcept {
  const double a = v > lo ? v : lo;
  return a < hi ? a : hi;
}

// vmaxq/vminq differ from maxpd/minpd only for NaN and signed-zero ties; use
// explicit compare-select to keep the scalar tie-breaking.
inline float64x2_t max_sel(float64x2_t a, float64x2_t b) noexcept {
  return vbslq_f64(vcgtq_f64(a, b), a, b);
}
inline float64x2_t min_sel(float64x2_t a, float64x2_t b) noexcept {
  return vbslq_f64(vcltq_f64(a, b), a, b);
}

void clamp(const double* in, const double* lo, const double* hi, double* out,
           std::size_t n) noexcept {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t a = max_sel(vld1q_f64(in + i), vld1q_f64(lo + i));
    vst1q_f64(out + i, min_sel(a, vld1q_f64(hi + i)));
  }
  for (; i < n; ++i) out[i] = clamp_tail(in[i], lo[i], hi[i]);
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  }
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void sub_combination3(const double* base, const double* r0, const double* r1,
                      const double* r2, double c0, double c1, double c2,
                      double* out, std::size_t n) noexcept {
  const float64x2_t v0 = vdupq_n_f64(c0);
  const float64x2_t v1 = vdupq_n_f64(c1);
  const float64x2_t v2 = vdupq_n_f64(c2);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t s = vaddq_f64(vmulq_f64(v0, vld1q_f64(r0 + i)),
                              vmulq_f64(v1, vld1q_f64(r1 + i)));
    s = vaddq_f64(s, vmulq_f64(v2, vld1q_f64(r2 + i)));
    vst1q_f64(out + i, vsubq_f64(vld1q_f64(base + i), s));
  }
  for (; i < n; ++i) {
    out[i] = base[i] - ((c0 * r0[i] + c1 * r1[i]) + c2 * r2[i]);
  }
}

double box_correction_step(const double* x, double* corr, double* y,
                           const double* lo, const double* hi,
                           std::size_t n) noexcept {
  float64x2_t disp2 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t z = vaddq_f64(vld1q_f64(x + i), vld1q_f64(corr + i));
    const float64x2_t yn =
        min_sel(max_sel(z, vld1q_f64(lo + i)), vld1q_f64(hi + i));
    vst1q_f64(corr + i, vsubq_f64(z, yn));
    disp2 = max_sel(vabsq_f64(vsubq_f64(yn, vld1q_f64(y + i))), disp2);
    vst1q_f64(y + i, yn);
  }
  const double l0 = vgetq_lane_f64(disp2, 0);
  const double l1 = vgetq_lane_f64(disp2, 1);
  double disp = l1 > l0 ? l1 : l0;
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

const KernelTable kNeonTable{Isa::Neon, &clamp, &dot, &sub_combination3,
                             &box_correction_step};

}  // namespace cablerender::simd::detail
