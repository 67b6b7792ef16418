#include <cstdlib>
#include <string>

#include "aist/error.hpp"
#include "aist/simd.hpp"

namespace aist::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(AIST_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(AIST_HAVE_NEON)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() {
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() {
  static const Isa chosen = [] {
    if (const char* env = std::getenv("AIST_SIMD")) {
      const std::string want(env);
      for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
        if (want == isa_name(isa) && isa_available(isa)) return isa;
    }
    return detected_isa();
  }();
  return chosen;
}

const KernelTable& kernels(Isa isa) {
  if (!isa_available(isa))
    throw UnsupportedConfiguration("kernel variant '" + std::string(isa_name(isa)) +
                                   "' is not available on this machine");
  switch (isa) {
#if defined(AIST_HAVE_AVX2)
    case Isa::avx2: return detail::avx2_table;
#endif
#if defined(AIST_HAVE_NEON)
    case Isa::neon: return detail::neon_table;
#endif
    default: return detail::scalar_table;
  }
}

void quadratic_forms(std::span<const double> sym, std::size_t n, std::span<const double> soa,
                     std::span<double> out, Isa isa) {
  const std::size_t count = out.size();
  if (sym.size() != n * n || soa.size() != n * count)
    throw ShapeError("quadratic_forms: inconsistent batch shapes");
  kernels(isa).quadratic_forms(sym.data(), n, soa.data(), count, out.data());
}

void affine_scores(std::span<const double> weights, std::span<const double> bias,
                   std::size_t classes, std::size_t dim, std::span<const double> features,
                   std::span<double> scores, Isa isa) {
  if (weights.size() != classes * dim || bias.size() != classes ||
      (dim > 0 && features.size() % dim != 0))
    throw ShapeError("affine_scores: inconsistent weight shapes");
  const std::size_t count = dim == 0 ? scores.size() / (classes ? classes : 1) : features.size() / dim;
  if (scores.size() != classes * count) throw ShapeError("affine_scores: bad output size");
  kernels(isa).affine_scores(weights.data(), bias.data(), classes, dim, features.data(), count,
                             scores.data());
}

void veronese2(std::span<const double> soa, std::size_t n, std::span<double> out, Isa isa) {
  if (n == 0) throw ShapeError("veronese2: empty state dimension");
  const std::size_t count = soa.size() / n;
  if (soa.size() != n * count || out.size() != n * (n + 1) / 2 * count)
    throw ShapeError("veronese2: inconsistent batch shapes");
  kernels(isa).veronese2(soa.data(), n, count, out.data());
}

}  // namespace aist::simd
