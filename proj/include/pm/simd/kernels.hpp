#pragma once

#include <cstddef>
#include <span>

namespace pm::simd {

enum class Isa { Scalar, Avx2 };

/// Inner loops shared by the density evaluations and the ACF estimator. Each
/// instruction set provides the same table; results agree up to summation
/// order.
struct KernelTable {
  /// Sum over k < n-1 of [(1 - h f'(x_k)) (x_{k+1} - x_k) - h f(x_k)]^2 with f
  /// and f' polynomials given by ascending coefficients.
  double (*poly_residual_sq)(const double* drift, std::size_t n_drift, const double* deriv,
                             std::size_t n_deriv, double h, const double* x, std::size_t n);
  /// Sum over k < n_tilde of (tilde_k - (hat_k + hat_{k+1}) / 2)^2; hat has
  /// n_tilde + 1 entries.
  double (*midpoint_residual_sq)(const double* hat, const double* tilde, std::size_t n_tilde);
  double (*dot)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_kernels();
/// Null when the build has no AVX2 variant.
const KernelTable* avx2_kernels();

bool cpu_has_avx2();

/// Best supported ISA, unless PM_SIMD=scalar is set in the environment.
Isa detected_isa();
Isa active_isa();
/// Pins the ISA for the rest of the process (tests and benchmarks).
void set_active_isa(Isa isa);
const KernelTable& kernels_for(Isa isa);
const KernelTable& active();
const char* isa_name(Isa isa);

}  // namespace pm::simd
