#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pm/kernels.hpp"

namespace pm {

/// Floor applied to IACT estimates so ratios stay finite for anti-correlated
/// series.
inline constexpr double kIactFloor = 0.1;

struct AcfResult {
  std::vector<int> lags;
  std::vector<double> acf;  // acf[0] == 1
  double iact = 1.0;
  int window = 0;
  bool window_found = false;
  std::size_t length = 0;
};

/// Biased autocorrelation estimator
///   c(l) = (1/N) sum_{t < N-l} (x_t - mean)(x_{t+l} - mean),  acf(l) = c(l)/c(0)
/// for l = 0..max_lag. Uses a direct lagged-dot loop for short inputs and an
/// FFT for long ones. Throws ArgumentError for constant series or
/// max_lag >= N.
AcfResult acf(std::span<const double> series, int max_lag);

/// Same estimator, always via the direct O(N * max_lag) sum.
std::vector<double> acf_direct(std::span<const double> series, int max_lag);
/// Same estimator, always via FFT.
std::vector<double> acf_fft(std::span<const double> series, int max_lag);

struct IactEstimate {
  double tau = 1.0;
  int window = 0;
  bool window_found = false;
};

/// Self-consistent window: tau(W) = 1 + 2 sum_{l=1..W} acf(l), W the
/// smallest lag with W >= 5 tau(W). Falls back to the largest lag with
/// window_found = false.
IactEstimate estimate_iact(std::span<const double> acf_values);
double iact(const AcfResult& r);

/// First lag at which acf drops below `threshold`.
std::optional<int> first_lag_below(const AcfResult& r, double threshold);

struct MeanEstimate {
  double mean = 0.0;
  double variance = 0.0;
  double tau = 1.0;
  double standard_error = 0.0;  // sqrt(variance * tau / N)
};

MeanEstimate mean_with_error(std::span<const double> series, int max_lag = 0);

struct SwapPairStats {
  std::uint64_t attempts = 0;
  std::uint64_t accepts = 0;
  std::uint64_t degenerate = 0;
  double rate() const {
    return attempts == 0 ? 0.0 : static_cast<double>(accepts) / static_cast<double>(attempts);
  }
};

struct SwapRecord {
  std::vector<SwapPairStats> pairs;

  explicit SwapRecord(std::size_t n_pairs = 0) : pairs(n_pairs) {}
  void record(const SwapOutcome& o);
  std::uint64_t total_attempts() const;
};

struct ComparisonRow {
  int lag = 0;
  double pm_acf = 0.0;
  double mh_acf_scaled = 0.0;  // NaN beyond the baseline's lag range
};

/// Places the baseline on the parallel chain's time axis: row l holds
/// mh_acf(cost_factor * l), linearly interpolated.
std::vector<ComparisonRow> cost_scaled_comparison(const AcfResult& pm, const AcfResult& mh,
                                                  double cost_factor);

}  // namespace pm
