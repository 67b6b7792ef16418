#include "aist/simd.hpp"

namespace aist::simd::detail {
namespace {

void quadratic_forms_scalar(const double* sym, std::size_t n, const double* soa,
                            std::size_t count, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
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

void affine_scores_scalar(const double* weights, const double* bias, std::size_t classes,
                          std::size_t dim, const double* features, std::size_t count,
                          double* scores) {
  for (std::size_t j = 0; j < classes; ++j) {
    const double* wj = weights + j * dim;
    double* sj = scores + j * count;
    for (std::size_t i = 0; i < count; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) acc = acc + wj[k] * features[k * count + i];
      sj[i] = acc + bias[j];
    }
  }
}

void veronese2_scalar(const double* soa, std::size_t n, std::size_t count, double* out) {
  std::size_t row = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b, ++row) {
      const double* xa = soa + a * count;
      const double* xb = soa + b * count;
      double* o = out + row * count;
      for (std::size_t i = 0; i < count; ++i) o[i] = xa[i] * xb[i];
    }
  }
}

}  // namespace

const KernelTable scalar_table{quadratic_forms_scalar, affine_scores_scalar, veronese2_scalar};

}  // namespace aist::simd::detail
