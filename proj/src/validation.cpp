#include "pm/validation.hpp"

#include <cmath>
#include <sstream>

#include "pm/diagnostics.hpp"
#include "pm/kernels.hpp"
#include "pm/oracle.hpp"

namespace pm {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

std::vector<ValidationCheck> run_validation(const ValidationOptions& opts) {
  using namespace oracle;
  std::vector<ValidationCheck> out;
  const DiscreteToy toy = DiscreteToy::standard();
  const auto pi = toy.stationary();

  {
    const double r = detailed_balance_residual(swap_exact_matrix(toy), pi);
    out.push_back({"exact swap detailed balance (toy)", r < 1e-12, "residual " + fmt(r)});
  }
  {
    const Matrix p = composite_matrix(within_level_matrix(toy), swap_exact_matrix(toy), 0.5);
    const double r = invariance_residual(p, pi);
    out.push_back({"composite kernel invariance (toy)", r < 1e-12, "residual " + fmt(r)});
  }
  SwapFaults faults;
  faults.invert_ratio = opts.inject_sign_error;
  for (int m : {1, 4}) {
    const auto mc = swap_approx_matrix_mc(toy, m, SwapVariant::Independent, opts.samples_per_row,
                                          opts.seed + static_cast<std::uint64_t>(m), faults);
    const auto check = mc_detailed_balance(mc, pi);
    out.push_back({"M-sample swap detailed balance M=" + std::to_string(m), check.pass,
                   "max z " + fmt(check.max_z) + ", max residual " + fmt(check.max_abs_residual)});
  }

  {
    const Hierarchy h = build_hierarchy(GridSpec{1.0, 2, 0.3, -0.7}, 1);
    const auto mom = gaussian_bridge_moments(LinearSde{0.0, 1.0}, h, 0);
    const bool ok = std::abs(mom.mean(0) - (-0.2)) < 1e-12 && std::abs(mom.cov(0, 0) - 0.25) < 1e-12;
    out.push_back({"zero-drift one-site bridge moments", ok,
                   "mean " + fmt(mom.mean(0)) + ", var " + fmt(mom.cov(0, 0))});
  }
  {
    const Hierarchy h = build_hierarchy(GridSpec{10.0, 64, 0.0, 0.0}, 4);
    Rng rng(opts.seed, {Purpose::Test, 100});
    std::vector<double> a(h.points(2)), b(h.points(2));
    for (std::size_t k = 1; k + 1 < a.size(); ++k) {
      a[k] = rng.normal();
      b[k] = rng.normal();
    }
    const double schur = gaussian_marginal_log_ratio(LinearSde{0.0, 1.0}, h, 1, a, b);
    const double tele = telescoped_marginal_log_ratio(1.0, h, 1, a, b);
    out.push_back({"Schur complement vs telescoped marginal", std::abs(schur - tele) < 1e-10,
                   "difference " + fmt(std::abs(schur - tele))});
  }
  {
    // one free site: stationary law N(mid, dt/2)
    const Hierarchy h = build_hierarchy(GridSpec{1.0, 2, 0.4, 1.0}, 1);
    const PathTarget target = PathTarget::bridge(builtin_zero_drift(), h);
    std::vector<double> x = {0.4, 0.7, 1.0};
    Rng rng(opts.seed, {Purpose::Test, 101});
    std::vector<double> series;
    const int n = 200000;
    series.reserve(n);
    for (int s = 0; s < n; ++s) {
      mh_sweep(target, 0, x, 0.8, rng);
      series.push_back(x[1]);
    }
    const auto est = mean_with_error(series);
    const double se_var = est.variance * std::sqrt(2.0 * est.tau / n);
    const bool ok = std::abs(est.mean - 0.7) < 3.0 * est.standard_error && std::abs(est.variance - 0.25) < 3.0 * se_var;
    out.push_back({"MH sweep stationarity (one-site bridge)", ok,
                   "mean " + fmt(est.mean) + ", var " + fmt(est.variance)});
  }
  return out;
}

}  // namespace pm
