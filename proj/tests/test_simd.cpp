#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "pm/config.hpp"
#include "pm/diagnostics.hpp"
#include "pm/hierarchy.hpp"
#include "pm/rng.hpp"
#include "pm/simd/kernels.hpp"

namespace simd = pm::simd;

namespace {

bool close(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

std::vector<double> normals(pm::Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("scalar table is always available") {
  CHECK(simd::kernels_for(simd::Isa::Scalar).dot == simd::scalar_kernels().dot);
  CHECK(std::string(simd::isa_name(simd::Isa::Scalar)) == "scalar");
  CHECK(std::string(simd::isa_name(simd::Isa::Avx2)) == "avx2");
}

TEST_CASE("scalar and AVX2 kernels agree") {
  if (simd::avx2_kernels() == nullptr || !simd::cpu_has_avx2()) {
    MESSAGE("AVX2 not available on this machine; equivalence not exercised");
    return;
  }
  const auto& s = simd::scalar_kernels();
  const auto& v = *simd::avx2_kernels();
  pm::Rng rng(31, {pm::Purpose::Test, 0});
  const std::vector<double> dw{0.0, 4.0, 0.0, -4.0}, dwd{4.0, 0.0, -12.0};
  const std::vector<double> lin{0.3, -0.7}, lind{-0.7};
  for (std::size_t n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33, 100, 1025, 8193}) {
    const auto x = normals(rng, n, 0.8);
    for (double h : {1e-3, 0.05, 1.25}) {
      CHECK(close(s.poly_residual_sq(dw.data(), dw.size(), dwd.data(), dwd.size(), h, x.data(), n),
                  v.poly_residual_sq(dw.data(), dw.size(), dwd.data(), dwd.size(), h, x.data(), n)));
      CHECK(close(s.poly_residual_sq(lin.data(), lin.size(), lind.data(), lind.size(), h, x.data(), n),
                  v.poly_residual_sq(lin.data(), lin.size(), lind.data(), lind.size(), h, x.data(), n)));
    }
    if (n >= 1) {
      const auto tilde = normals(rng, n - 1);
      CHECK(close(s.midpoint_residual_sq(x.data(), tilde.data(), n - 1),
                  v.midpoint_residual_sq(x.data(), tilde.data(), n - 1)));
    }
    const auto y = normals(rng, n);
    CHECK(close(s.dot(x.data(), y.data(), n), v.dot(x.data(), y.data(), n), 1e-11));
  }
}

TEST_CASE("density and ACF results agree across ISAs") {
  if (simd::avx2_kernels() == nullptr || !simd::cpu_has_avx2()) return;
  auto cfg = pm::bridge_defaults();
  cfg.grid_steps = 256;
  cfg.levels = 6;
  const auto target = pm::make_target(cfg);
  pm::Rng rng(37, {pm::Purpose::Test, 0});
  std::vector<double> path = normals(rng, target.hierarchy().points(0), 0.5);
  path.front() = cfg.z_minus;
  path.back() = cfg.z_plus;
  std::vector<double> series(3000);
  double a = 0.0;
  for (auto& x : series) x = a = 0.8 * a + rng.normal();

  simd::set_active_isa(simd::Isa::Scalar);
  const double lp_s = target.log_pi(0, path);
  const auto acf_s = pm::acf_direct(series, 50);
  simd::set_active_isa(simd::Isa::Avx2);
  const double lp_v = target.log_pi(0, path);
  const auto acf_v = pm::acf_direct(series, 50);
  CHECK(close(lp_s, lp_v));
  for (std::size_t l = 0; l < acf_s.size(); ++l) CHECK(std::abs(acf_s[l] - acf_v[l]) < 1e-12);
}

TEST_CASE("pinning the ISA") {
  simd::set_active_isa(simd::Isa::Scalar);
  CHECK(simd::active_isa() == simd::Isa::Scalar);
  CHECK(simd::active().dot == simd::scalar_kernels().dot);
  simd::set_active_isa(simd::detected_isa());
  CHECK(simd::active_isa() == simd::detected_isa());
}
