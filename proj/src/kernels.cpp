#include "pm/kernels.hpp"

#include <cmath>

namespace pm {

const char* swap_variant_name(SwapVariant v) {
  return v == SwapVariant::CommonNoise ? "common_noise" : "independent";
}

SwapVariant swap_variant_from_name(const std::string& name) {
  if (name == "common_noise") return SwapVariant::CommonNoise;
  if (name == "independent") return SwapVariant::Independent;
  throw ConfigError("unknown swap variant '" + name + "'");
}

void KernelConfig::validate(int levels) const {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in [0, 1)");
  if (sweeps < 1) throw ConfigError("sweeps must be at least 1");
  if (static_cast<int>(proposal_scale.size()) != levels) {
    throw ConfigError("proposal_scale needs one entry per level");
  }
  for (double s : proposal_scale) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("proposal scales must be finite and >= 0");
  }
  if (static_cast<int>(m_schedule.size()) < levels - 1) {
    throw ConfigError("M schedule needs one entry per level pair");
  }
  for (int m : m_schedule) {
    if (m < 1) throw ConfigError("every M must be at least 1");
  }
}

std::vector<int> m_schedule_linear(int pairs) {
  std::vector<int> m;
  for (int i = 0; i < pairs; ++i) m.push_back(i + 1);
  return m;
}

std::vector<int> m_schedule_doubling(int pairs) {
  std::vector<int> m;
  for (int i = 0; i < pairs; ++i) m.push_back(1 << i);
  return m;
}

std::vector<double> default_proposal_scales(const Hierarchy& h) {
  std::vector<double> s;
  for (int i = 0; i < h.levels(); ++i) s.push_back(std::sqrt(h.step(i)));
  return s;
}

ChainRngs::ChainRngs(std::uint64_t seed, int levels) : schedule(seed, {Purpose::Schedule, 0}) {
  for (int i = 0; i < levels; ++i) {
    mh.emplace_back(seed, StreamId{Purpose::Mh, static_cast<std::uint32_t>(i)});
    swap.emplace_back(seed, StreamId{Purpose::Swap, static_cast<std::uint32_t>(i)});
  }
}

MhStats mh_sweep(const PathTarget& target, int level, std::span<double> values, double scale, Rng& rng) {
  bool finite = false;
  try {
    finite = std::isfinite(target.log_pi(level, values));
  } catch (const NumericalError&) {
  }
  if (!finite) {
    throw ContractError("mh_sweep: target is not finite at the current path");
  }
  MhStats stats;
  const std::size_t begin = target.first_free(level);
  const std::size_t end = target.end_free(level);
  if (!target.polynomial()) {
    for (std::size_t k = begin; k < end; ++k) {
      const double proposal = values[k] + scale * rng.normal();
      const double delta = target.log_pi_site_delta(level, values, k, proposal);
      ++stats.proposed;
      if (std::log(rng.uniform_open()) < delta) {
        values[k] = proposal;
        ++stats.accepted;
      }
    }
    return stats;
  }
  // Same proposals and decisions as above; the drift at the left neighbour is
  // carried over from the previous site and the constant sigma term cancels.
  const double h = target.hierarchy().step(level);
  const std::size_t n = values.size();
  PathTarget::SiteDrift left = begin > 0 ? target.drift_at(values[begin - 1]) : PathTarget::SiteDrift{};
  for (std::size_t k = begin; k < end; ++k) {
    const double x = values[k];
    const double proposal = x + scale * rng.normal();
    const PathTarget::SiteDrift cur = target.drift_at(x);
    const PathTarget::SiteDrift prop = target.drift_at(proposal);
    double delta = 0.0;
    if (k > 0) {
      delta += target.v_with(left, values[k - 1], x, h) - target.v_with(left, values[k - 1], proposal, h);
    }
    if (k + 1 < n) {
      delta += target.v_with(cur, x, values[k + 1], h) - target.v_with(prop, proposal, values[k + 1], h);
    }
    if (target.has_site_extra(level, k)) {
      delta += target.site_extra(level, k, proposal) - target.site_extra(level, k, x);
    }
    ++stats.proposed;
    const double u = rng.uniform_open();
    if (delta >= 0.0 || std::log(u) < delta) {
      values[k] = proposal;
      left = prop;
      ++stats.accepted;
    } else {
      left = cur;
    }
  }
  return stats;
}

std::vector<MhStats> product_step(ChainState& state, const PathTarget& target,
                                  const KernelConfig& config, ChainRngs& rngs) {
  std::vector<MhStats> stats(state.levels.size());
  for (std::size_t i = 0; i < state.levels.size(); ++i) {
    auto& path = state.levels[i];
    for (int s = 0; s < config.sweeps; ++s) {
      const MhStats st = mh_sweep(target, path.level, path.values, config.proposal_scale[i], rngs.mh[i]);
      stats[i].proposed += st.proposed;
      stats[i].accepted += st.accepted;
    }
  }
  return stats;
}

double log_sum_exp(std::span<const double> log_w) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : log_w) mx = std::max(mx, x);
  if (mx == -std::numeric_limits<double>::infinity()) return mx;
  if (!std::isfinite(mx)) return mx;  // +inf or NaN propagates
  double s = 0.0;
  for (double x : log_w) s += std::exp(x - mx);
  return mx + std::log(s);
}

std::size_t multinomial_select(std::span<const double> log_w, double u) {
  if (log_w.empty()) throw ArgumentError("multinomial_select: no weights");
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : log_w) mx = std::max(mx, x);
  std::vector<double> cum(log_w.size());
  double total = 0.0;
  for (std::size_t j = 0; j < log_w.size(); ++j) {
    total += std::exp(log_w[j] - mx);
    cum[j] = total;
  }
  const double target = u * total;
  for (std::size_t j = 0; j < cum.size(); ++j) {
    if (target < cum[j]) return j;
  }
  // u * total rounded up to total: take the last index with positive weight
  for (std::size_t j = log_w.size(); j-- > 0;) {
    if (log_w[j] > -std::numeric_limits<double>::infinity()) return j;
  }
  return log_w.size() - 1;
}

// ---------------------------------------------------------------------------

LevelPair::LevelPair(const PathTarget& target, int level)
    : target_(&target), level_(level) {
  const Hierarchy& h = target.hierarchy();
  if (level < 0 || level + 1 >= h.levels()) throw ArgumentError("swap: level pair out of range");
  nt_ = h.points(level) / 2;
  sd_ = std::sqrt(reference_variance(h, level));
  scratch_.resize(h.points(level));
}

double LevelPair::log_fine(std::span<const double> hat, std::span<const double> tilde) const {
  merge_into(hat, tilde, scratch_);
  return target_->log_pi(level_, scratch_);
}

double LevelPair::log_coarse(std::span<const double> x) const { return target_->log_pi(level_ + 1, x); }

double LevelPair::log_reference(std::span<const double> hat, std::span<const double> tilde) const {
  return pm::log_reference(target_->hierarchy(), level_, hat, tilde);
}

void LevelPair::reference_mean(std::span<const double> hat, std::span<double> out) const {
  for (std::size_t k = 0; k < nt_; ++k) out[k] = 0.5 * (hat[k] + hat[k + 1]);
}

void LevelPair::sample_noise(Rng& rng, std::span<double> out) const {
  for (std::size_t k = 0; k < nt_; ++k) out[k] = sd_ * rng.normal();
}

void LevelPair::sample_reference(std::span<const double> hat, Rng& rng, std::span<double> out) const {
  for (std::size_t k = 0; k < nt_; ++k) out[k] = 0.5 * (hat[k] + hat[k + 1]) + sd_ * rng.normal();
}

SwapOutcome swap_approx(ChainState& state, const PathTarget& target, int level, int m,
                        SwapVariant variant, Rng& rng, SwapFaults faults) {
  const LevelPair pair(target, level);
  auto& fine = state.levels.at(static_cast<std::size_t>(level)).values;
  auto& coarse = state.levels.at(static_cast<std::size_t>(level) + 1).values;
  const SplitValues parts = split(fine);
  std::vector<double> new_tilde(parts.tilde.size());
  SwapOutcome out = approx_swap_core(pair, parts.hat, parts.tilde, coarse, m, variant, rng, new_tilde, faults);
  out.level = level;
  if (out.accepted) {
    merge_into(coarse, new_tilde, fine);
    coarse = parts.hat;
  }
  return out;
}

namespace {

struct OracleExactPair {
  const LevelPair* pair;
  const ExactLevelOracle* oracle;
  std::size_t tilde_size() const { return pair->tilde_size(); }
  double log_coarse(std::span<const double> x) const { return pair->log_coarse(x); }
  double log_marginal(std::span<const double> hat) const { return oracle->log_marginal(hat); }
  void sample_conditional(std::span<const double> hat, Rng& rng, std::span<double> out) const {
    oracle->sample_conditional(hat, rng, out);
  }
};

}  // namespace

SwapOutcome swap_exact(ChainState& state, const PathTarget& target, int level,
                       const ExactLevelOracle& oracle, Rng& rng) {
  if (!oracle.log_marginal || !oracle.sample_conditional) {
    throw UnsupportedError("swap_exact: no exact marginal available for this target");
  }
  const LevelPair pair(target, level);
  const OracleExactPair exact{&pair, &oracle};
  auto& fine = state.levels.at(static_cast<std::size_t>(level)).values;
  auto& coarse = state.levels.at(static_cast<std::size_t>(level) + 1).values;
  const SplitValues parts = split(fine);
  std::vector<double> new_tilde(parts.tilde.size());
  SwapOutcome out = exact_swap_core(exact, parts.hat, coarse, rng, new_tilde);
  out.level = level;
  if (out.accepted) {
    merge_into(coarse, new_tilde, fine);
    coarse = parts.hat;
  }
  return out;
}

std::optional<SwapOutcome> composite_step(ChainState& state, const PathTarget& target,
                                          const KernelConfig& config, ChainRngs& rngs,
                                          std::vector<MhStats>* mh_stats, SwapFaults faults) {
  const int pairs = static_cast<int>(state.levels.size()) - 1;
  auto outcome = composite_apply(
      config.alpha, pairs, rngs.schedule,
      [&](int i) {
        return swap_approx(state, target, i, config.m_schedule[static_cast<std::size_t>(i)],
                           config.variant, rngs.swap[static_cast<std::size_t>(i)], faults);
      },
      [&] {
        auto st = product_step(state, target, config, rngs);
        if (mh_stats != nullptr) {
          for (std::size_t i = 0; i < st.size(); ++i) {
            (*mh_stats)[i].proposed += st[i].proposed;
            (*mh_stats)[i].accepted += st[i].accepted;
          }
        }
      });
  ++state.step;
  return outcome;
}

}  // namespace pm
