#include <cmath>

#include "kernels_internal.hpp"

namespace cablerender::simd::detail {
namespace {

// The ternaries mirror the operand order of maxpd/minpd (and NEON fmax/fmin on
// finite input) so the vector paths agree bitwise, including signed zeros.
inline double clamp_one(double v, double lo, double hi) noexcept {
  const double a = v > lo ? v : lo;
  return a < hi ? a : hi;
}

void clamp(const double* in, const double* lo, const double* hi, double* out,
           std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) out[i] = clamp_one(in[i], lo[i], hi[i]);
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void sub_combination3(const double* base, const double* r0, const double* r1,
                      const double* r2, double c0, double c1, double c2,
                      double* out, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = base[i] - ((c0 * r0[i] + c1 * r1[i]) + c2 * r2[i]);
  }
}

double box_correction_step(const double* x, double* corr, double* y,
                           const double* lo, const double* hi,
                           std::size_t n) noexcept {
  double disp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = x[i] + corr[i];
    const double yn = clamp_one(z, lo[i], hi[i]);
    corr[i] = z - yn;
    const double d = std::fabs(yn - y[i]);
    disp = d > disp ? d : disp;
    y[i] = yn;
  }
  return disp;
}

}  // namespace

const KernelTable kScalarTable{Isa::Scalar, &clamp, &dot, &sub_combination3,
                               &box_correction_step};

}  // namespace cablerender::simd::detail
