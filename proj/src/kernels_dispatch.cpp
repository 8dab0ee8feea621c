// Runtime backend selection. No SIMD intrinsics in this file.

#include "fgd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_internal.hpp"

namespace fgd::kern {

namespace {

using detail::Backend;

const Backend* resolve() {
  const char* env = std::getenv("FGD_FORCE_SCALAR");
  if (env != nullptr && std::strcmp(env, "1") == 0) return &detail::scalar_backend();
#ifdef FGD_HAVE_AVX2
  if (detail::cpu_has_avx2()) return &detail::avx2_backend();
#endif
#ifdef FGD_HAVE_NEON
  return &detail::neon_backend();
#endif
  return &detail::scalar_backend();
}

std::atomic<const Backend*>& slot() {
  static std::atomic<const Backend*> g{resolve()};
  return g;
}

const Backend& active() { return *slot().load(std::memory_order_relaxed); }

} // namespace

void fmadd(double* dst, const double* w, const double* x, std::size_t n) {
  active().fmadd(dst, w, x, n);
}

void axpy(double a, const double* x, double* dst, std::size_t n) {
  active().axpy(a, x, dst, n);
}

void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  active().axpby(a, x, b, y, out, n);
}

void mul(double* dst, const double* m, std::size_t n) { active().mul(dst, m, n); }

void sq_diff_acc(double* dst, const double* a, const double* b, std::size_t n) {
  active().sq_diff_acc(dst, a, b, n);
}

double sum_abs(const double* x, std::size_t n) { return active().sum_abs(x, n); }

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  return active().sum_sq_diff(a, b, n);
}

const char* active_isa() { return active().name; }

void force_scalar(bool on) {
  slot().store(on ? &detail::scalar_backend() : resolve(), std::memory_order_relaxed);
}

} // namespace fgd::kern
