#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pm/errors.hpp"
#include "pm/hierarchy.hpp"
#include "pm/rng.hpp"

namespace pm {

/// Composite chain state Y^n = (Y_0, ..., Y_L).
struct ChainState {
  std::vector<Path> levels;
  std::uint64_t step = 0;
};

enum class SwapVariant {
  CommonNoise,  // shared Gaussian noises between the u and v sets
  Independent,  // fresh draws from p_i for both sets
};

const char* swap_variant_name(SwapVariant v);
SwapVariant swap_variant_from_name(const std::string& name);

struct KernelConfig {
  double alpha = 0.5;
  std::vector<int> m_schedule;          // per level pair (i, i+1)
  std::vector<double> proposal_scale;   // per level
  int sweeps = 1;
  SwapVariant variant = SwapVariant::CommonNoise;

  void validate(int levels) const;
};

/// Default M schedules: i+1 for bridges, 2^i for smoothing.
std::vector<int> m_schedule_linear(int pairs);
std::vector<int> m_schedule_doubling(int pairs);
/// sqrt(2^i dt) per level.
std::vector<double> default_proposal_scales(const Hierarchy& h);

struct SwapOutcome {
  int level = 0;  // pair (level, level + 1)
  bool accepted = false;
  double log_acceptance = 0.0;
  int m = 1;
  bool degenerate = false;
};

/// Deliberate faults for checking that the validation suite notices them.
struct SwapFaults {
  bool invert_ratio = false;
};

/// Independent substreams: one per level for MH, one per pair for swaps, one
/// for the swap schedule. Level updates never share a stream.
struct ChainRngs {
  ChainRngs(std::uint64_t seed, int levels);
  std::vector<Rng> mh;
  std::vector<Rng> swap;
  Rng schedule;
};

struct MhStats {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
};

/// One ascending sweep of single-site random-walk Metropolis over the free
/// positions of a level.
MhStats mh_sweep(const PathTarget& target, int level, std::span<double> values, double scale, Rng& rng);

/// Applies `sweeps` MH sweeps to every level with its own stream.
std::vector<MhStats> product_step(ChainState& state, const PathTarget& target,
                                  const KernelConfig& config, ChainRngs& rngs);

// --- weight helpers --------------------------------------------------------

/// log(sum exp(x)) with max shift; -inf when every entry is -inf.
double log_sum_exp(std::span<const double> log_w);

/// Inverse-CDF draw from weights exp(log_w) using a single uniform u in [0,1).
std::size_t multinomial_select(std::span<const double> log_w, double u);

// --- generic swap cores ----------------------------------------------------

/// What the M-sample swap needs from a level pair (i, i+1).
template <class P>
concept ApproxSwapPair = requires(const P& p, std::span<const double> a, std::span<const double> b,
                                  std::span<double> out, Rng& rng) {
  { p.tilde_size() } -> std::convertible_to<std::size_t>;
  { p.log_fine(a, b) } -> std::convertible_to<double>;
  { p.log_coarse(a) } -> std::convertible_to<double>;
  { p.log_reference(a, b) } -> std::convertible_to<double>;
  p.sample_reference(a, rng, out);
};

/// Reference densities that are a fixed noise law shifted by a hat-dependent
/// mean; required by the common-noise variant.
template <class P>
concept LocationReferencePair = ApproxSwapPair<P> && requires(const P& p, std::span<const double> a,
                                                              std::span<double> out, Rng& rng) {
  p.reference_mean(a, out);
  p.sample_noise(rng, out);
};

/// What the exact swap needs: the marginal of the fine level (up to a
/// hat-independent constant) and its conditional sampler.
template <class P>
concept ExactSwapPair = requires(const P& p, std::span<const double> a, std::span<double> out, Rng& rng) {
  { p.tilde_size() } -> std::convertible_to<std::size_t>;
  { p.log_coarse(a) } -> std::convertible_to<double>;
  { p.log_marginal(a) } -> std::convertible_to<double>;
  p.sample_conditional(a, rng, out);
};

namespace detail {

inline double checked_log_acceptance(double log_ratio) {
  if (std::isnan(log_ratio)) throw NumericalError("swap: NaN acceptance ratio");
  return std::min(0.0, log_ratio);
}

}  // namespace detail

/// Exact-marginal log acceptance for proposing (hat, coarse) -> (coarse, hat).
template <ExactSwapPair P>
double exact_swap_log_acceptance(const P& pair, std::span<const double> hat, std::span<const double> coarse) {
  return detail::checked_log_acceptance(pair.log_marginal(coarse) + pair.log_coarse(hat) -
                                        pair.log_marginal(hat) - pair.log_coarse(coarse));
}

/// Exact swap: accept with the marginal ratio, then draw the new tilde values
/// from the fine conditional given `coarse`. On acceptance `new_tilde` holds
/// that draw; otherwise it is untouched.
template <ExactSwapPair P>
SwapOutcome exact_swap_core(const P& pair, std::span<const double> hat, std::span<const double> coarse,
                            Rng& rng, std::span<double> new_tilde) {
  SwapOutcome out;
  out.log_acceptance = exact_swap_log_acceptance(pair, hat, coarse);
  out.accepted = std::log(rng.uniform_open()) < out.log_acceptance;
  if (out.accepted) pair.sample_conditional(coarse, rng, new_tilde);
  return out;
}

/// M-sample swap. `hat`/`tilde` are the fine level's split, `coarse` the
/// next level's state. On acceptance `new_tilde` receives the selected u.
template <ApproxSwapPair P>
SwapOutcome approx_swap_core(const P& pair, std::span<const double> hat, std::span<const double> tilde,
                             std::span<const double> coarse, int m, SwapVariant variant, Rng& rng,
                             std::span<double> new_tilde, SwapFaults faults = {}) {
  if (m < 1) throw ArgumentError("swap: M must be at least 1");
  const std::size_t nt = pair.tilde_size();
  const auto mm = static_cast<std::size_t>(m);
  SwapOutcome out;
  out.m = m;

  std::vector<double> u(mm * nt);
  std::vector<double> zeta;
  std::vector<double> log_wu(mm);
  auto u_row = [&](std::size_t j) { return std::span<double>(u.data() + j * nt, nt); };

  if (variant == SwapVariant::CommonNoise) {
    if constexpr (LocationReferencePair<P>) {
      zeta.resize(mm * nt);
      std::vector<double> mean_c(nt);
      pair.reference_mean(coarse, mean_c);
      for (std::size_t j = 0; j < mm; ++j) {
        std::span<double> z(zeta.data() + j * nt, nt);
        pair.sample_noise(rng, z);
        for (std::size_t k = 0; k < nt; ++k) u_row(j)[k] = mean_c[k] + z[k];
      }
    } else {
      throw UnsupportedError("swap: common-noise variant needs a location-family reference");
    }
  } else {
    for (std::size_t j = 0; j < mm; ++j) pair.sample_reference(coarse, rng, u_row(j));
  }
  for (std::size_t j = 0; j < mm; ++j) {
    log_wu[j] = pair.log_fine(coarse, u_row(j)) - pair.log_reference(coarse, u_row(j));
  }
  const double lse_u = log_sum_exp(log_wu);
  if (std::isnan(lse_u)) throw NumericalError("swap: NaN weight");
  const double select_u = rng.uniform();
  if (lse_u == -std::numeric_limits<double>::infinity()) {
    out.degenerate = true;
    out.log_acceptance = -std::numeric_limits<double>::infinity();
    return out;
  }
  const std::size_t chosen = multinomial_select(log_wu, select_u);

  std::vector<double> log_wv;
  log_wv.reserve(mm);
  log_wv.push_back(pair.log_fine(hat, tilde) - pair.log_reference(hat, tilde));
  std::vector<double> v(nt);
  if (variant == SwapVariant::CommonNoise) {
    if constexpr (LocationReferencePair<P>) {
      std::vector<double> mean_h(nt);
      pair.reference_mean(hat, mean_h);
      for (std::size_t j = 0; j < mm; ++j) {
        if (j == chosen) continue;
        for (std::size_t k = 0; k < nt; ++k) v[k] = mean_h[k] + zeta[j * nt + k];
        log_wv.push_back(pair.log_fine(hat, v) - pair.log_reference(hat, v));
      }
    }
  } else {
    for (std::size_t j = 1; j < mm; ++j) {
      pair.sample_reference(hat, rng, v);
      log_wv.push_back(pair.log_fine(hat, v) - pair.log_reference(hat, v));
    }
  }
  const double lse_v = log_sum_exp(log_wv);
  double log_ratio = pair.log_coarse(hat) + lse_u - pair.log_coarse(coarse) - lse_v;
  if (faults.invert_ratio) log_ratio = -log_ratio;
  out.log_acceptance = detail::checked_log_acceptance(log_ratio);
  out.accepted = std::log(rng.uniform_open()) < out.log_acceptance;
  if (out.accepted) {
    auto sel = u_row(chosen);
    std::copy(sel.begin(), sel.end(), new_tilde.begin());
  }
  return out;
}

/// With probability alpha pick a pair uniformly and call swap(pair); then
/// always call product(). Returns the swap outcome when one was attempted.
template <class SwapFn, class ProductFn>
std::optional<SwapOutcome> composite_apply(double alpha, int pairs, Rng& schedule, SwapFn&& swap,
                                           ProductFn&& product) {
  std::optional<SwapOutcome> outcome;
  const double coin = schedule.uniform();
  if (pairs > 0 && coin < alpha) {
    const int pair = std::min(pairs - 1, static_cast<int>(schedule.uniform() * pairs));
    outcome = swap(pair);
    outcome->level = pair;
  }
  product();
  return outcome;
}

// --- path-level kernels ----------------------------------------------------

/// Adapter presenting levels (i, i+1) of a PathTarget as a swap pair.
class LevelPair {
 public:
  LevelPair(const PathTarget& target, int level);

  std::size_t tilde_size() const { return nt_; }
  double log_fine(std::span<const double> hat, std::span<const double> tilde) const;
  double log_coarse(std::span<const double> x) const;
  double log_reference(std::span<const double> hat, std::span<const double> tilde) const;
  void sample_reference(std::span<const double> hat, Rng& rng, std::span<double> out) const;
  void reference_mean(std::span<const double> hat, std::span<double> out) const;
  void sample_noise(Rng& rng, std::span<double> out) const;

 private:
  const PathTarget* target_;
  int level_;
  std::size_t nt_;
  double sd_;
  mutable std::vector<double> scratch_;
};

SwapOutcome swap_approx(ChainState& state, const PathTarget& target, int level, int m,
                        SwapVariant variant, Rng& rng, SwapFaults faults = {});

/// Exact marginal of level i (up to a constant) and its conditional sampler,
/// available only for targets with closed-form marginals.
struct ExactLevelOracle {
  std::function<double(std::span<const double>)> log_marginal;
  std::function<void(std::span<const double>, Rng&, std::span<double>)> sample_conditional;
};

SwapOutcome swap_exact(ChainState& state, const PathTarget& target, int level,
                       const ExactLevelOracle& oracle, Rng& rng);

std::optional<SwapOutcome> composite_step(ChainState& state, const PathTarget& target,
                                          const KernelConfig& config, ChainRngs& rngs,
                                          std::vector<MhStats>* mh_stats = nullptr,
                                          SwapFaults faults = {});

}  // namespace pm
