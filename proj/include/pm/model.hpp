#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pm {

using ScalarFn = std::function<double(double)>;

/// Drift written as a polynomial with constant diffusion. When a model carries
/// this form the vectorized path kernels are used for full-path sums.
struct PolynomialForm {
  std::vector<double> drift_coeffs;  // ascending powers: c0 + c1 x + c2 x^2 + ...
  double sigma = 1.0;
};

/// One-dimensional SDE dZ = f(Z) dt + sigma(Z) dW.
struct ModelSpec {
  std::string name;
  ScalarFn drift;
  ScalarFn drift_derivative;
  ScalarFn diffusion;
  std::optional<PolynomialForm> polynomial;
};

/// One-step potential of the linearly implicit Euler scheme:
///   V(x, y, dt) = [(1 - dt f'(x)) (y - x) - dt f(x)]^2 / (2 sigma(x)^2 dt)
double potential_v(const ModelSpec& model, double x, double y, double dt);

/// -log sigma(x); the per-transition Gaussian prefactor dropped by a bare
/// exp(-sum V).
double log_sigma_correction(const ModelSpec& model, double x);

ModelSpec builtin_double_well();
ModelSpec builtin_ou(double rate);
/// Brownian motion with constant diffusion.
ModelSpec builtin_zero_drift(double sigma = 1.0);

/// Model with a polynomial drift and constant sigma; f' derived from the
/// coefficients.
ModelSpec polynomial_model(std::string name, std::vector<double> drift_coeffs, double sigma);

struct DerivativeCheck {
  bool ok = true;
  double worst_relative_error = 0.0;
  double worst_x = 0.0;
};

/// Compares f' against a centered finite difference of f at `points` uniform
/// samples in [lo, hi].
DerivativeCheck validate_drift_derivative(const ModelSpec& model, int points = 100,
                                          double rel_tol = 1e-5, std::uint64_t seed = 7,
                                          double lo = -3.0, double hi = 3.0);

/// Looks up a builtin by name ("double_well", "ou", "zero_drift").
ModelSpec model_by_name(const std::string& name, double rate = 1.0);

}  // namespace pm
