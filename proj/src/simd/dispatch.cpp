#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"

namespace cablerender::simd {

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_kernels() noexcept { return detail::kScalarTable; }

const KernelTable* kernels_for(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return &detail::kScalarTable;
    case Isa::Avx2:
#if defined(CABLERENDER_HAVE_AVX2)
      if (__builtin_cpu_supports("avx2")) return &detail::kAvx2Table;
#endif
      return nullptr;
    case Isa::Neon:
#if defined(CABLERENDER_HAVE_NEON)
      return &detail::kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (const KernelTable* t = kernels_for(isa)) out.push_back(t);
  }
  return out;
}

namespace {

const KernelTable& select_best() noexcept {
  if (const char* env = std::getenv("CABLERENDER_ISA")) {
    if (std::string_view(env) == "scalar") return detail::kScalarTable;
  }
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (const KernelTable* t = kernels_for(isa)) return *t;
  }
  return detail::kScalarTable;
}

}  // namespace

const KernelTable& active_kernels() noexcept {
  static const KernelTable& table = select_best();
  return table;
}

}  // namespace cablerender::simd
