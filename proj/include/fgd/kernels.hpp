#pragma once

#include <cstddef>

// Data-parallel inner loops used by the filter and sampler hot paths.
// Scalar reference kernels plus SIMD variants selected at runtime.
//
// Elementwise kernels (fmadd, axpy, axpby, mul, sq_diff_acc) are
// bit-identical across backends: every fused multiply-add is an exactly
// rounded fma and lanes are independent. Reductions (sum_abs,
// sum_sq_diff) accumulate in a backend-specific order and agree with the
// scalar reference only up to rounding.

namespace fgd::kern {

/// dst[i] += w[i] * x[i]
void fmadd(double* dst, const double* w, const double* x, std::size_t n);

/// dst[i] += a * x[i]
void axpy(double a, const double* x, double* dst, std::size_t n);

/// out[i] = a * x[i] + b * y[i]
void axpby(double a, const double* x, double b, const double* y, double* out, std::size_t n);

/// dst[i] *= m[i]
void mul(double* dst, const double* m, std::size_t n);

/// dst[i] += (a[i] - b[i])^2
void sq_diff_acc(double* dst, const double* a, const double* b, std::size_t n);

/// sum of |x[i]|
double sum_abs(const double* x, std::size_t n);

/// sum of (a[i] - b[i])^2
double sum_sq_diff(const double* a, const double* b, std::size_t n);

/// Name of the backend currently dispatched to: "avx2", "neon" or "scalar".
const char* active_isa();

/// Pin the scalar reference backend (equivalence tests). Setting the
/// environment variable FGD_FORCE_SCALAR=1 before first use has the same
/// effect.
void force_scalar(bool on);

} // namespace fgd::kern
