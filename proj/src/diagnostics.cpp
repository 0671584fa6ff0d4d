#include "pm/diagnostics.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <memory>

#include "pm/errors.hpp"
#include "pm/simd/kernels.hpp"

namespace pm {

namespace {

// Direct sums above this many multiply-adds switch to the FFT path.
constexpr double kDirectBudget = 2.0e7;

std::vector<double> centered(std::span<const double> series, int max_lag) {
  if (max_lag < 1 || static_cast<std::size_t>(max_lag) >= series.size()) {
    throw ArgumentError("acf: need 1 <= max_lag < series length");
  }
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(series.size());
  std::vector<double> c(series.begin(), series.end());
  bool constant = true;
  for (auto& x : c) {
    x -= mean;
    if (x != 0.0) constant = false;
  }
  if (constant) throw ArgumentError("acf: constant series has undefined variance");
  return c;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

std::vector<double> acf_direct(std::span<const double> series, int max_lag) {
  const auto c = centered(series, max_lag);
  const auto& k = simd::active();
  const std::size_t n = c.size();
  std::vector<double> out(static_cast<std::size_t>(max_lag) + 1);
  const double c0 = k.dot(c.data(), c.data(), n);
  out[0] = 1.0;
  for (int l = 1; l <= max_lag; ++l) {
    const auto lag = static_cast<std::size_t>(l);
    out[lag] = k.dot(c.data(), c.data() + lag, n - lag) / c0;
  }
  return out;
}

std::vector<double> acf_fft(std::span<const double> series, int max_lag) {
  const auto c = centered(series, max_lag);
  const std::size_t n = c.size();
  const std::size_t nfft = next_pow2(2 * n);
  const std::size_t nc = nfft / 2 + 1;
  auto* in = static_cast<double*>(fftw_malloc(sizeof(double) * nfft));
  auto* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc));
  std::unique_ptr<double, decltype(&fftw_free)> in_guard(in, fftw_free);
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> spec_guard(spec, fftw_free);

  // Plans are created before the data is written; FFTW_ESTIMATE keeps the
  // plan (and hence the rounding) independent of timing.
  fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in, spec, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_c2r_1d(static_cast<int>(nfft), spec, in, FFTW_ESTIMATE);
  std::copy(c.begin(), c.end(), in);
  std::fill(in + n, in + nfft, 0.0);
  fftw_execute(fwd);
  for (std::size_t j = 0; j < nc; ++j) {
    const double re = spec[j][0], im = spec[j][1];
    spec[j][0] = re * re + im * im;
    spec[j][1] = 0.0;
  }
  fftw_execute(bwd);
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);

  std::vector<double> out(static_cast<std::size_t>(max_lag) + 1);
  out[0] = 1.0;
  for (int l = 1; l <= max_lag; ++l) out[static_cast<std::size_t>(l)] = in[l] / in[0];
  return out;
}

IactEstimate estimate_iact(std::span<const double> acf_values) {
  IactEstimate est;
  double tau = 1.0;
  for (std::size_t w = 1; w < acf_values.size(); ++w) {
    tau += 2.0 * acf_values[w];
    if (static_cast<double>(w) >= 5.0 * tau) {
      est.tau = std::max(tau, kIactFloor);
      est.window = static_cast<int>(w);
      est.window_found = true;
      return est;
    }
  }
  est.tau = std::max(tau, kIactFloor);
  est.window = static_cast<int>(acf_values.size()) - 1;
  return est;
}

double iact(const AcfResult& r) { return estimate_iact(r.acf).tau; }

AcfResult acf(std::span<const double> series, int max_lag) {
  AcfResult r;
  const double work = static_cast<double>(series.size()) * static_cast<double>(max_lag);
  r.acf = work <= kDirectBudget ? acf_direct(series, max_lag) : acf_fft(series, max_lag);
  r.acf[0] = 1.0;
  r.lags.resize(r.acf.size());
  for (std::size_t l = 0; l < r.lags.size(); ++l) r.lags[l] = static_cast<int>(l);
  r.length = series.size();
  const auto est = estimate_iact(r.acf);
  r.iact = est.tau;
  r.window = est.window;
  r.window_found = est.window_found;
  return r;
}

std::optional<int> first_lag_below(const AcfResult& r, double threshold) {
  for (std::size_t l = 0; l < r.acf.size(); ++l) {
    if (r.acf[l] < threshold) return static_cast<int>(l);
  }
  return std::nullopt;
}

MeanEstimate mean_with_error(std::span<const double> series, int max_lag) {
  if (series.size() < 2) throw ArgumentError("mean_with_error: need at least two samples");
  MeanEstimate m;
  for (double x : series) m.mean += x;
  m.mean /= static_cast<double>(series.size());
  for (double x : series) m.variance += (x - m.mean) * (x - m.mean);
  m.variance /= static_cast<double>(series.size());
  if (m.variance == 0.0) return m;
  if (max_lag <= 0) max_lag = static_cast<int>(std::min<std::size_t>(series.size() / 4, 100000));
  max_lag = std::max(1, max_lag);
  m.tau = acf(series, max_lag).iact;
  m.standard_error = std::sqrt(m.variance * m.tau / static_cast<double>(series.size()));
  return m;
}

void SwapRecord::record(const SwapOutcome& o) {
  auto& p = pairs.at(static_cast<std::size_t>(o.level));
  ++p.attempts;
  if (o.accepted) ++p.accepts;
  if (o.degenerate) ++p.degenerate;
}

std::uint64_t SwapRecord::total_attempts() const {
  std::uint64_t n = 0;
  for (const auto& p : pairs) n += p.attempts;
  return n;
}

std::vector<ComparisonRow> cost_scaled_comparison(const AcfResult& pm, const AcfResult& mh,
                                                  double cost_factor) {
  if (!(cost_factor > 0.0)) throw ArgumentError("cost_scaled_comparison: factor must be positive");
  std::vector<ComparisonRow> rows;
  const double mh_max = static_cast<double>(mh.acf.size()) - 1.0;
  for (std::size_t l = 0; l < pm.acf.size(); ++l) {
    ComparisonRow row;
    row.lag = static_cast<int>(l);
    row.pm_acf = pm.acf[l];
    const double x = cost_factor * static_cast<double>(l);
    if (x > mh_max) {
      row.mh_acf_scaled = std::numeric_limits<double>::quiet_NaN();
    } else {
      const auto lo = static_cast<std::size_t>(std::floor(x));
      const double frac = x - static_cast<double>(lo);
      row.mh_acf_scaled = frac == 0.0 ? mh.acf[lo] : (1.0 - frac) * mh.acf[lo] + frac * mh.acf[lo + 1];
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pm
