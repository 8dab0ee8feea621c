#include "kernels_internal.hpp"

#ifdef FGD_HAVE_AVX2

#include <immintrin.h>

namespace fgd::kern::detail {

namespace {

void fmadd_avx2(double* dst, const double* w, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wv = _mm256_loadu_pd(w + i);
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d dv = _mm256_loadu_pd(dst + i);
    _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(wv, xv, dv));
  }
  fmadd_scalar(dst + i, w + i, x + i, n - i);
}

void axpy_avx2(double a, const double* x, double* dst, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d dv = _mm256_loadu_pd(dst + i);
    _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(av, xv, dv));
  }
  axpy_scalar(a, x + i, dst + i, n - i);
}

void axpby_avx2(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  const __m256d bv = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(bv, yv, _mm256_mul_pd(av, xv)));
  }
  axpby_scalar(a, x + i, b, y + i, out + i, n - i);
}

void mul_avx2(double* dst, const double* m, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dv = _mm256_loadu_pd(dst + i);
    const __m256d mv = _mm256_loadu_pd(m + i);
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(dv, mv));
  }
  mul_scalar(dst + i, m + i, n - i);
}

void sq_diff_acc_avx2(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d av = _mm256_loadu_pd(a + i);
    const __m256d bv = _mm256_loadu_pd(b + i);
    const __m256d dv = _mm256_sub_pd(av, bv);
    const __m256d acc = _mm256_loadu_pd(dst + i);
    _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(dv, dv, acc));
  }
  sq_diff_acc_scalar(dst + i, a + i, b + i, n - i);
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s2 = _mm_add_pd(lo, hi);
  const __m128d s1 = _mm_add_sd(s2, _mm_unpackhi_pd(s2, s2));
  return _mm_cvtsd_f64(s1);
}

double sum_abs_avx2(const double* x, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  s += sum_abs_scalar(x + i, n - i);
  return s;
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  s += sum_sq_diff_scalar(a + i, b + i, n - i);
  return s;
}

} // namespace

bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const Backend& avx2_backend() {
  static const Backend b{
      "avx2",    fmadd_avx2,       axpy_avx2,    axpby_avx2,
      mul_avx2,  sq_diff_acc_avx2, sum_abs_avx2, sum_sq_diff_avx2,
  };
  return b;
}

} // namespace fgd::kern::detail

#endif // FGD_HAVE_AVX2
