#pragma once

#include <cstddef>

// Backend vtable shared by the dispatcher and the per-ISA kernel files.
// No intrinsics in this header.

namespace fgd::kern::detail {

struct Backend {
  const char* name;
  void (*fmadd)(double*, const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*axpby)(double, const double*, double, const double*, double*, std::size_t);
  void (*mul)(double*, const double*, std::size_t);
  void (*sq_diff_acc)(double*, const double*, const double*, std::size_t);
  double (*sum_abs)(const double*, std::size_t);
  double (*sum_sq_diff)(const double*, const double*, std::size_t);
};

const Backend& scalar_backend();

// Scalar loops, reused by SIMD backends for remainders. Fused ops go
// through std::fma so elementwise results match FMA lanes bit for bit.
void fmadd_scalar(double* dst, const double* w, const double* x, std::size_t n);
void axpy_scalar(double a, const double* x, double* dst, std::size_t n);
void axpby_scalar(double a, const double* x, double b, const double* y, double* out, std::size_t n);
void mul_scalar(double* dst, const double* m, std::size_t n);
void sq_diff_acc_scalar(double* dst, const double* a, const double* b, std::size_t n);
double sum_abs_scalar(const double* x, std::size_t n);
double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n);

#ifdef FGD_HAVE_AVX2
const Backend& avx2_backend();
bool cpu_has_avx2();
#endif
#ifdef FGD_HAVE_NEON
const Backend& neon_backend();
#endif

} // namespace fgd::kern::detail
