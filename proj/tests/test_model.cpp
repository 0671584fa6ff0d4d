#include <doctest.h>

#include <cmath>

#include "pm/errors.hpp"
#include "pm/model.hpp"
#include "pm/rng.hpp"

namespace {

pm::ModelSpec custom_sigma(pm::ScalarFn sigma) {
  pm::ModelSpec m = pm::builtin_zero_drift();
  m.name = "custom";
  m.diffusion = std::move(sigma);
  m.polynomial.reset();
  return m;
}

}  // namespace

TEST_CASE("potential_v small examples") {
  const auto bm = pm::builtin_zero_drift();
  CHECK(pm::potential_v(bm, 0.0, 0.0, 1.0) == 0.0);
  CHECK(pm::potential_v(bm, 0.0, 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("potential_v double well against independent evaluation") {
  // values from exact rational arithmetic outside the build
  const auto dw = pm::builtin_double_well();
  CHECK(pm::potential_v(dw, 0.5, 0.6, 0.01) == doctest::Approx(0.3528).epsilon(1e-13));
  CHECK(pm::potential_v(dw, 1.2, 0.9, 0.05) == doctest::Approx(1.5492096).epsilon(1e-13));
}

TEST_CASE("potential_v vanishes on the deterministic step") {
  const auto dw = pm::builtin_double_well();
  const double x = 0.3, dt = 0.02;
  const double y = x + dt * dw.drift(x) / (1.0 - dt * dw.drift_derivative(x));
  CHECK(pm::potential_v(dw, x, y, dt) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(pm::potential_v(dw, x, y + 0.1, dt) > 0.0);
}

TEST_CASE("potential_v errors") {
  const auto dw = pm::builtin_double_well();
  CHECK_THROWS_AS(pm::potential_v(dw, 0.0, 0.0, 0.0), pm::ArgumentError);
  CHECK_THROWS_AS(pm::potential_v(dw, 0.0, 0.0, -1.0), pm::ArgumentError);
  const auto bad = custom_sigma([](double) { return 0.0; });
  CHECK_THROWS_AS(pm::potential_v(bad, 0.0, 1.0, 0.1), pm::ModelError);
  CHECK_THROWS_AS(pm::potential_v(dw, 1e200, 0.0, 0.1), pm::NumericalError);
}

TEST_CASE("zero drift reduces to a Gaussian increment") {
  const auto bm = pm::builtin_zero_drift(1.7);
  pm::Rng rng(1, {pm::Purpose::Test, 0});
  for (int i = 0; i < 50; ++i) {
    const double x = rng.normal(), y = rng.normal(), dt = 0.01 + rng.uniform();
    CHECK(pm::potential_v(bm, x, y, dt) ==
          doctest::Approx((y - x) * (y - x) / (2.0 * 1.7 * 1.7 * dt)).epsilon(1e-14));
  }
}

TEST_CASE("sigma rescaling with the residual leaves V unchanged") {
  // sigma -> c sigma and (y - x) -> c (y - x) with f -> c f keeps V fixed
  pm::Rng rng(2, {pm::Purpose::Test, 0});
  for (int i = 0; i < 20; ++i) {
    const double c = 0.5 + 2.0 * rng.uniform();
    const double a = 0.3 + rng.uniform();
    const auto base = pm::polynomial_model("lin", {0.2, -a}, 1.0);
    const auto scaled = pm::polynomial_model("lin", {0.2 * c, -a}, c);
    const double x = rng.normal(), y = rng.normal(), dt = 0.05;
    const double xs = c * x, ys = c * y;
    // f(x) = 0.2 - a x scales to 0.2 c - a c x = c f(x) at xs
    CHECK(pm::potential_v(scaled, xs, ys, dt) == doctest::Approx(pm::potential_v(base, x, y, dt)).epsilon(1e-12));
  }
}

TEST_CASE("log sigma correction") {
  CHECK(pm::log_sigma_correction(pm::builtin_double_well(), 0.7) == 0.0);
  CHECK(pm::log_sigma_correction(pm::builtin_zero_drift(2.0), 0.0) == doctest::Approx(-std::log(2.0)));
  const auto m = custom_sigma([](double x) { return 1.0 + x * x; });
  CHECK(pm::log_sigma_correction(m, 1.0) == doctest::Approx(-std::log(2.0)));
  const auto bad = custom_sigma([](double x) { return -1.0 - x * x; });
  CHECK_THROWS_AS(pm::log_sigma_correction(bad, 0.0), pm::ModelError);
}

TEST_CASE("builtin double well") {
  const auto dw = pm::builtin_double_well();
  CHECK(dw.drift(0.0) == 0.0);
  CHECK(dw.drift(1.0) == 0.0);
  CHECK(dw.drift(-1.0) == 0.0);
  CHECK(dw.drift(0.5) == doctest::Approx(1.5));
  CHECK(dw.drift_derivative(0.0) == doctest::Approx(4.0));
  CHECK(dw.diffusion(3.0) == 1.0);
  CHECK(pm::validate_drift_derivative(dw).ok);
}

TEST_CASE("builtin OU") {
  const auto ou = pm::builtin_ou(1.0);
  CHECK(ou.drift(2.0) == doctest::Approx(-2.0));
  CHECK(ou.drift_derivative(-5.0) == doctest::Approx(-1.0));
  CHECK(pm::builtin_ou(0.5).drift(-2.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(pm::builtin_ou(0.0), pm::ArgumentError);
  CHECK_THROWS_AS(pm::builtin_ou(-1.0), pm::ArgumentError);
  CHECK(pm::validate_drift_derivative(ou).ok);
}

TEST_CASE("derivative validator catches a wrong f'") {
  auto dw = pm::builtin_double_well();
  dw.drift_derivative = [](double x) { return -12.0 * x * x + 4.5; };
  const auto check = pm::validate_drift_derivative(dw);
  CHECK_FALSE(check.ok);
  CHECK(check.worst_relative_error > 1e-3);
}

TEST_CASE("model lookup") {
  CHECK(pm::model_by_name("double_well").name == "double_well");
  CHECK(pm::model_by_name("ou", 2.0).drift(1.0) == doctest::Approx(-2.0));
  CHECK(pm::model_by_name("zero_drift").drift(4.0) == 0.0);
  CHECK_THROWS(pm::model_by_name("nope"));
}
