#include "kernels_internal.hpp"

#ifdef FGD_HAVE_NEON

#include <arm_neon.h>

namespace fgd::kern::detail {

namespace {

void fmadd_neon(double* dst, const double* w, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t wv = vld1q_f64(w + i);
    const float64x2_t xv = vld1q_f64(x + i);
    const float64x2_t dv = vld1q_f64(dst + i);
    vst1q_f64(dst + i, vfmaq_f64(dv, wv, xv));
  }
  fmadd_scalar(dst + i, w + i, x + i, n - i);
}

void axpy_neon(double a, const double* x, double* dst, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t xv = vld1q_f64(x + i);
    const float64x2_t dv = vld1q_f64(dst + i);
    vst1q_f64(dst + i, vfmaq_f64(dv, av, xv));
  }
  axpy_scalar(a, x + i, dst + i, n - i);
}

void axpby_neon(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  const float64x2_t bv = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t xv = vld1q_f64(x + i);
    const float64x2_t yv = vld1q_f64(y + i);
    vst1q_f64(out + i, vfmaq_f64(vmulq_f64(av, xv), bv, yv));
  }
  axpby_scalar(a, x + i, b, y + i, out + i, n - i);
}

void mul_neon(double* dst, const double* m, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(dst + i, vmulq_f64(vld1q_f64(dst + i), vld1q_f64(m + i)));
  }
  mul_scalar(dst + i, m + i, n - i);
}

void sq_diff_acc_neon(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dv = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    vst1q_f64(dst + i, vfmaq_f64(vld1q_f64(dst + i), dv, dv));
  }
  sq_diff_acc_scalar(dst + i, a + i, b + i, n - i);
}

double sum_abs_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabsq_f64(vld1q_f64(x + i)));
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  s += sum_abs_scalar(x + i, n - i);
  return s;
}

double sum_sq_diff_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dv = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, dv, dv);
  }
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  s += sum_sq_diff_scalar(a + i, b + i, n - i);
  return s;
}

} // namespace

const Backend& neon_backend() {
  static const Backend b{
      "neon",    fmadd_neon,       axpy_neon,    axpby_neon,
      mul_neon,  sq_diff_acc_neon, sum_abs_neon, sum_sq_diff_neon,
  };
  return b;
}

} // namespace fgd::kern::detail

#endif // FGD_HAVE_NEON
