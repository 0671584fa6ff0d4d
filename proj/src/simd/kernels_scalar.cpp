#include "pm/simd/kernels.hpp"

namespace pm::simd {

namespace {

inline double horner(const double* c, std::size_t n, double x) {
  double acc = 0.0;
  for (std::size_t p = n; p-- > 0;) acc = acc * x + c[p];
  return acc;
}

double poly_residual_sq(const double* drift, std::size_t n_drift, const double* deriv,
                        std::size_t n_deriv, double h, const double* x, std::size_t n) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double xk = x[k];
    const double r = (1.0 - h * horner(deriv, n_deriv, xk)) * (x[k + 1] - xk) -
                     h * horner(drift, n_drift, xk);
    sum += r * r;
  }
  return sum;
}

double midpoint_residual_sq(const double* hat, const double* tilde, std::size_t n_tilde) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n_tilde; ++k) {
    const double r = tilde[k] - 0.5 * (hat[k] + hat[k + 1]);
    sum += r * r;
  }
  return sum;
}

double dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{poly_residual_sq, midpoint_residual_sq, dot};
  return table;
}

}  // namespace pm::simd
