#pragma once

// Batch kernels for the data-parallel loops of the toolkit: quadratic-form
// evaluation over many states, affine class scores over many feature
// vectors, and the degree-2 Veronese embedding.
//
// Every kernel has a scalar reference and vector variants (AVX2 on x86-64,
// NEON on AArch64). All variants evaluate the same arithmetic in the same
// order without contraction, so their outputs are bit-identical; the
// equivalence tests hold them to that.
//
// Batches use a structure-of-arrays layout: component r of item i lives at
// data[r * count + i].

#include <cstddef>
#include <span>
#include <string_view>

namespace aist::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  void (*quadratic_forms)(const double* sym, std::size_t n, const double* soa,
                          std::size_t count, double* out);
  void (*affine_scores)(const double* weights, const double* bias, std::size_t classes,
                        std::size_t dim, const double* features, std::size_t count,
                        double* scores);
  void (*veronese2)(const double* soa, std::size_t n, std::size_t count, double* out);
};

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);

/// Best variant supported by the running CPU.
Isa detected_isa();

/// The variant used by default: detected_isa(), unless the AIST_SIMD
/// environment variable names another available one ("scalar", "avx2",
/// "neon").
Isa active_isa();

/// Throws UnsupportedConfiguration if the variant is not compiled in or not
/// supported by this CPU.
const KernelTable& kernels(Isa isa);

/// out[i] = x_iᵀ S x_i for a row-major n×n matrix S.
void quadratic_forms(std::span<const double> sym, std::size_t n, std::span<const double> soa,
                     std::span<double> out, Isa isa = active_isa());

/// scores[j * count + i] = Σ_k W[j, k] · F[k, i] + b[j], with W row-major
/// classes×dim and F in SoA layout dim×count.
void affine_scores(std::span<const double> weights, std::span<const double> bias,
                   std::size_t classes, std::size_t dim, std::span<const double> features,
                   std::span<double> scores, Isa isa = active_isa());

/// Veronese embedding of an SoA batch of n-vectors into n(n+1)/2 rows.
void veronese2(std::span<const double> soa, std::size_t n, std::span<double> out,
               Isa isa = active_isa());

namespace detail {
extern const KernelTable scalar_table;
#if defined(AIST_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(AIST_HAVE_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace aist::simd
