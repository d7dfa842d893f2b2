#pragma once

// Inner-loop kernels used by the tension solver.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, a vector implementation (AVX2 on x86-64, NEON on AArch64).
// The active table is chosen once at first use from the running CPU.
//
// Elementwise kernels (clamp, sub_combination3, box_correction_step) produce
// bit-identical results across implementations. Only dot() reorders its
// reduction and may differ in the last few ulps.

#include <cstddef>
#include <string_view>
#include <vector>

namespace cablerender::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
  Isa isa;

  // out[i] = min(max(in[i], lo[i]), hi[i])
  void (*clamp)(const double* in, const double* lo, const double* hi,
                double* out, std::size_t n) noexcept;

  double (*dot)(const double* a, const double* b, std::size_t n) noexcept;

  // out[i] = base[i] - (c0*r0[i] + c1*r1[i] + c2*r2[i])
  void (*sub_combination3)(const double* base, const double* r0,
                           const double* r1, const double* r2, double c0,
                           double c1, double c2, double* out,
                           std::size_t n) noexcept;

  // One box half-step of Dykstra's method:
  //   z = x + corr;  y_new = clamp(z, lo, hi);  corr = z - y_new
  // y holds the previous box iterate on entry and y_new on exit. Returns
  // max_i |y_new[i] - y_prev[i]|.
  double (*box_correction_step)(const double* x, double* corr, double* y,
                                const double* lo, const double* hi,
                                std::size_t n) noexcept;
};

const KernelTable& scalar_kernels() noexcept;

// nullptr when the ISA was not compiled in or the CPU lacks it.
const KernelTable* kernels_for(Isa isa) noexcept;

// Every table usable on this machine, scalar first.
std::vector<const KernelTable*> available_kernels();

// Best available table. Setting CABLERENDER_ISA=scalar in the environment
// pins the scalar reference.
const KernelTable& active_kernels() noexcept;

}  // namespace cablerender::simd
