#include "kernels_internal.hpp"

#include <cmath>

namespace fgd::kern::detail {

void fmadd_scalar(double* dst, const double* w, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = std::fma(w[i], x[i], dst[i]);
}

void axpy_scalar(double a, const double* x, double* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = std::fma(a, x[i], dst[i]);
}

void axpby_scalar(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fma(b, y[i], a * x[i]);
}

void mul_scalar(double* dst, const double* m, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] *= m[i];
}

void sq_diff_acc_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    dst[i] = std::fma(d, d, dst[i]);
  }
}

double sum_abs_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i]);
  return s;
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s = std::fma(d, d, s);
  }
  return s;
}

const Backend& scalar_backend() {
  static const Backend b{
      "scalar",        fmadd_scalar,    axpy_scalar,    axpby_scalar,
      mul_scalar,      sq_diff_acc_scalar, sum_abs_scalar, sum_sq_diff_scalar,
  };
  return b;
}

} // namespace fgd::kern::detail
