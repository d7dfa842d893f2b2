#pragma once

#include "cablerender/simd/kernels.hpp"

namespace cablerender::simd::detail {

extern const KernelTable kScalarTable;
#if defined(CABLERENDER_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(CABLERENDER_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif

}  // namespace cablerender::simd::detail
