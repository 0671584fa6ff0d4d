// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "pm/simd/kernels.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace pm::simd {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d horner4(const double* c, std::size_t n, __m256d x) {
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t p = n; p-- > 0;) acc = _mm256_fmadd_pd(acc, x, _mm256_set1_pd(c[p]));
  return acc;
}

inline double horner1(const double* c, std::size_t n, double x) {
  double acc = 0.0;
  for (std::size_t p = n; p-- > 0;) acc = acc * x + c[p];
  return acc;
}

double poly_residual_sq(const double* drift, std::size_t n_drift, const double* deriv,
                        std::size_t n_deriv, double h, const double* x, std::size_t n) {
  if (n < 2) return 0.0;
  const std::size_t terms = n - 1;
  const __m256d vh = _mm256_set1_pd(h);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= terms; k += 4) {
    const __m256d xk = _mm256_loadu_pd(x + k);
    const __m256d xn = _mm256_loadu_pd(x + k + 1);
    const __m256d fp = horner4(deriv, n_deriv, xk);
    const __m256d f = horner4(drift, n_drift, xk);
    const __m256d lin = _mm256_fnmadd_pd(vh, fp, one);
    const __m256d r = _mm256_fmsub_pd(lin, _mm256_sub_pd(xn, xk), _mm256_mul_pd(vh, f));
    acc = _mm256_fmadd_pd(r, r, acc);
  }
  double sum = hsum(acc);
  for (; k < terms; ++k) {
    const double xk = x[k];
    const double r = (1.0 - h * horner1(deriv, n_deriv, xk)) * (x[k + 1] - xk) -
                     h * horner1(drift, n_drift, xk);
    sum += r * r;
  }
  return sum;
}

double midpoint_residual_sq(const double* hat, const double* tilde, std::size_t n_tilde) {
  const __m256d half = _mm256_set1_pd(0.5);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n_tilde; k += 4) {
    const __m256d mid =
        _mm256_mul_pd(half, _mm256_add_pd(_mm256_loadu_pd(hat + k), _mm256_loadu_pd(hat + k + 1)));
    const __m256d r = _mm256_sub_pd(_mm256_loadu_pd(tilde + k), mid);
    acc = _mm256_fmadd_pd(r, r, acc);
  }
  double sum = hsum(acc);
  for (; k < n_tilde; ++k) {
    const double r = tilde[k] - 0.5 * (hat[k] + hat[k + 1]);
    sum += r * r;
  }
  return sum;
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) sum += a[k] * b[k];
  return sum;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{poly_residual_sq, midpoint_residual_sq, dot};
  return &table;
}

}  // namespace pm::simd

#else

namespace pm::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace pm::simd

#endif
