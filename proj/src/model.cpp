#include "pm/model.hpp"

#include <algorithm>
#include <cmath>

#include "pm/errors.hpp"
#include "pm/rng.hpp"

namespace pm {

namespace {

double checked_sigma(const ModelSpec& model, double x) {
  const double s = model.diffusion(x);
  if (!(s > 0.0)) {
    throw ModelError("diffusion must be strictly positive (model '" + model.name + "')");
  }
  return s;
}

double horner(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

}  // namespace

double potential_v(const ModelSpec& model, double x, double y, double dt) {
  if (!(dt > 0.0)) throw ArgumentError("potential_v: dt must be positive");
  const double s = checked_sigma(model, x);
  const double residual = (1.0 - dt * model.drift_derivative(x)) * (y - x) - dt * model.drift(x);
  const double v = residual * residual / (2.0 * s * s * dt);
  if (!std::isfinite(v)) throw NumericalError("potential_v: non-finite value");
  return v;
}

double log_sigma_correction(const ModelSpec& model, double x) {
  return -std::log(checked_sigma(model, x));
}

ModelSpec polynomial_model(std::string name, std::vector<double> drift_coeffs, double sigma) {
  if (!(sigma > 0.0)) throw ModelError("polynomial_model: sigma must be positive");
  std::vector<double> deriv;
  for (std::size_t p = 1; p < drift_coeffs.size(); ++p) {
    deriv.push_back(static_cast<double>(p) * drift_coeffs[p]);
  }
  ModelSpec m;
  m.name = std::move(name);
  m.drift = [c = drift_coeffs](double x) { return horner(c, x); };
  m.drift_derivative = [d = std::move(deriv)](double x) { return horner(d, x); };
  m.diffusion = [sigma](double) { return sigma; };
  m.polynomial = PolynomialForm{std::move(drift_coeffs), sigma};
  return m;
}

ModelSpec builtin_double_well() {
  // f(x) = -4x(x^2 - 1) = 4x - 4x^3
  return polynomial_model("double_well", {0.0, 4.0, 0.0, -4.0}, 1.0);
}

ModelSpec builtin_ou(double rate) {
  if (!(rate > 0.0)) throw ArgumentError("builtin_ou: rate must be positive");
  return polynomial_model("ou", {0.0, -rate}, 1.0);
}

ModelSpec builtin_zero_drift(double sigma) {
  return polynomial_model("zero_drift", {0.0}, sigma);
}

ModelSpec model_by_name(const std::string& name, double rate) {
  if (name == "double_well") return builtin_double_well();
  if (name == "ou") return builtin_ou(rate);
  if (name == "zero_drift") return builtin_zero_drift();
  throw ConfigError("unknown model '" + name + "'");
}

DerivativeCheck validate_drift_derivative(const ModelSpec& model, int points, double rel_tol,
                                          std::uint64_t seed, double lo, double hi) {
  Rng rng(seed, {Purpose::Test, 0});
  DerivativeCheck out;
  for (int n = 0; n < points; ++n) {
    const double x = lo + (hi - lo) * rng.uniform();
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    const double fd = (model.drift(x + h) - model.drift(x - h)) / (2.0 * h);
    const double exact = model.drift_derivative(x);
    const double err = std::abs(fd - exact) / std::max(1.0, std::abs(exact));
    if (err > out.worst_relative_error) {
      out.worst_relative_error = err;
      out.worst_x = x;
    }
  }
  out.ok = out.worst_relative_error <= rel_tol;
  return out;
}

}  // namespace pm
