#include <immintrin.h>

#include "aist/simd.hpp"

namespace aist::simd::detail {
namespace {

constexpr std::size_t kLanes = 4;

void quadratic_forms_avx2(const double* sym, std::size_t n, const double* soa,
                          std::size_t count, double* out) {
  std::size_t i = 0;
  for (; i + kLanes <= count; i += kLanes) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t r = 0; r < n; ++r) {
      const __m256d xr = _mm256_loadu_pd(soa + r * count + i);
      for (std::size_t c = 0; c < n; ++c) {
        __m256d t = _mm256_mul_pd(_mm256_set1_pd(sym[r * n + c]), xr);
        t = _mm256_mul_pd(t, _mm256_loadu_pd(soa + c * count + i));
        acc = _mm256_add_pd(acc, t);
      }
    }
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < count; ++i) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double xr = soa[r * count + i];
      for (std::size_t c = 0; c < n; ++c) {
        double t = sym[r * n + c] * xr;
        t = t * soa[c * count + i];
        acc = acc + t;
      }
    }
    out[i] = acc;
  }
}

void affine_scores_avx2(const double* weights, const double* bias, std::size_t classes,
                        std::size_t dim, const double* features, std::size_t count,
                        double* scores) {
  for (std::size_t j = 0; j < classes; ++j) {
    const double* wj = weights + j * dim;
    double* sj = scores + j * count;
    const __m256d bj = _mm256_set1_pd(bias[j]);
    std::size_t i = 0;
    for (; i + kLanes <= count; i += kLanes) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < dim; ++k) {
        const __m256d t = _mm256_mul_pd(_mm256_set1_pd(wj[k]),
                                        _mm256_loadu_pd(features + k * count + i));
        acc = _mm256_add_pd(acc, t);
      }
      _mm256_storeu_pd(sj + i, _mm256_add_pd(acc, bj));
    }
    for (; i < count; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) acc = acc + wj[k] * features[k * count + i];
      sj[i] = acc + bias[j];
    }
  }
}

void veronese2_avx2(const double* soa, std::size_t n, std::size_t count, double* out) {
  std::size_t row = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b, ++row) {
      const double* xa = soa + a * count;
      const double* xb = soa + b * count;
      double* o = out + row * count;
      std::size_t i = 0;
      for (; i + kLanes <= count; i += kLanes)
        _mm256_storeu_pd(o + i, _mm256_mul_pd(_mm256_loadu_pd(xa + i), _mm256_loadu_pd(xb + i)));
      for (; i < count; ++i) o[i] = xa[i] * xb[i];
    }
  }
}

}  // namespace

const KernelTable avx2_table{quadratic_forms_avx2, affine_scores_avx2, veronese2_avx2};

}  // namespace aist::simd::detail
