#include <arm_neon.h>

#include "aist/simd.hpp"

namespace aist::simd::detail {
namespace {

constexpr std::size_t kLanes = 2;

void quadratic_forms_neon(const double* sym, std::size_t n, const double* soa,
                          std::size_t count, double* out) {
  std::size_t i = 0;
  for (; i + kLanes <= count; i += kLanes) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const float64x2_t xr = vld1q_f64(soa + r * count + i);
      for (std::size_t c = 0; c < n; ++c) {
        float64x2_t t = vmulq_f64(vdupq_n_f64(sym[r * n + c]), xr);
        t = vmulq_f64(t, vld1q_f64(soa + c * count + i));
        acc = vaddq_f64(acc, t);
      }
    }
    vst1q_f64(out + i, acc);
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

void affine_scores_neon(const double* weights, const double* bias, std::size_t classes,
                        std::size_t dim, const double* features, std::size_t count,
                        double* scores) {
  for (std::size_t j = 0; j < classes; ++j) {
    const double* wj = weights + j * dim;
    double* sj = scores + j * count;
    const float64x2_t bj = vdupq_n_f64(bias[j]);
    std::size_t i = 0;
    for (; i + kLanes <= count; i += kLanes) {
      float64x2_t acc = vdupq_n_f64(0.0);
      for (std::size_t k = 0; k < dim; ++k)
        acc = vaddq_f64(acc, vmulq_f64(vdupq_n_f64(wj[k]), vld1q_f64(features + k * count + i)));
      vst1q_f64(sj + i, vaddq_f64(acc, bj));
    }
    for (; i < count; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) acc = acc + wj[k] * features[k * count + i];
      sj[i] = acc + bias[j];
    }
  }
}

void veronese2_neon(const double* soa, std::size_t n, std::size_t count, double* out) {
  std::size_t row = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b, ++row) {
      const double* xa = soa + a * count;
      const double* xb = soa + b * count;
      double* o = out + row * count;
      std::size_t i = 0;
      for (; i + kLanes <= count; i += kLanes)
        vst1q_f64(o + i, vmulq_f64(vld1q_f64(xa + i), vld1q_f64(xb + i)));
      for (; i < count; ++i) o[i] = xa[i] * xb[i];
    }
  }
}

}  // namespace

const KernelTable neon_table{quadratic_forms_neon, affine_scores_neon, veronese2_neon};

}  // namespace aist::simd::detail
