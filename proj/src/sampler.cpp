#include "pm/sampler.hpp"

#include <chrono>
#include <cmath>

#include "pm/errors.hpp"

namespace pm {

Observable midpoint_observable() {
  return {"midpoint", [](const ChainState& s) {
            const auto& v = s.levels.front().values;
            return v[v.size() / 2];
          }};
}

void RunPlan::validate() const {
  if (steps < 1) throw ConfigError("plan.steps must be at least 1");
  if (thinning < 1) throw ConfigError("plan.thinning must be at least 1");
  if (tune && tuning_window < 1) throw ConfigError("plan.tuning_window must be at least 1");
}

std::uint64_t default_burn_in(std::uint64_t steps) { return std::max<std::uint64_t>(steps / 10, 10000); }

ChainState init_state(const PathTarget& target, std::uint64_t seed, double jitter) {
  const Hierarchy& h = target.hierarchy();
  double left = h.grid().z_minus;
  double right = h.grid().z_plus;
  if (const auto* obs = target.observations(); obs != nullptr && !obs->values.empty()) {
    left = obs->values.front();
    right = obs->values.back();
  }
  ChainState state;
  for (int i = 0; i < h.levels(); ++i) {
    Rng rng(seed, {Purpose::Init, static_cast<std::uint32_t>(i)});
    Path p;
    p.level = i;
    p.problem = target.problem();
    const std::size_t n = h.points(i);
    p.values.resize(n);
    const double sd = jitter * std::sqrt(h.step(i) / 4.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double frac = static_cast<double>(k) / static_cast<double>(n - 1);
      p.values[k] = left + (right - left) * frac;
    }
    for (std::size_t k = target.first_free(i); k < target.end_free(i); ++k) {
      if (jitter != 0.0) p.values[k] += sd * rng.normal();
    }
    if (target.problem() == Problem::Bridge) {
      p.values.front() = h.grid().z_minus;
      p.values.back() = h.grid().z_plus;
    }
    state.levels.push_back(std::move(p));
  }
  return state;
}

namespace {

void tune_scales(KernelConfig& config, const std::vector<MhStats>& window) {
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (window[i].proposed == 0) continue;
    const double rate = static_cast<double>(window[i].accepted) / static_cast<double>(window[i].proposed);
    if (rate < 0.3) config.proposal_scale[i] *= 0.8;
    if (rate > 0.5) config.proposal_scale[i] *= 1.25;
  }
}

}  // namespace

RunResult run(const RunPlan& plan, KernelConfig config, const PathTarget& target) {
  plan.validate();
  config.validate(target.levels());
  ChainState state = init_state(target, plan.seed, plan.init_jitter);
  ChainRngs rngs(plan.seed, target.levels());
  const std::size_t nlev = state.levels.size();

  std::vector<MhStats> window(nlev);
  for (std::uint64_t n = 0; n < plan.burn_in; ++n) {
    composite_step(state, target, config, rngs, &window);
    if (plan.tune && (n + 1) % plan.tuning_window == 0) {
      tune_scales(config, window);
      window.assign(nlev, MhStats{});
    }
  }

  RunResult result;
  result.swaps = SwapRecord(nlev - 1);
  result.mh_stats.assign(nlev, MhStats{});
  for (const auto& o : plan.observables) result.names.push_back(o.name);
  result.trajectories.resize(plan.observables.size());
  for (auto& t : result.trajectories) t.reserve(plan.steps / plan.thinning);

  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t n = 0; n < plan.steps; ++n) {
    if (auto outcome = composite_step(state, target, config, rngs, &result.mh_stats)) {
      result.swaps.record(*outcome);
    }
    if ((n + 1) % plan.thinning == 0) {
      for (std::size_t j = 0; j < plan.observables.size(); ++j) {
        const double value = plan.observables[j].fn(state);
        if (!std::isfinite(value)) {
          throw NumericalError("run: observable '" + plan.observables[j].name +
                               "' is non-finite at step " + std::to_string(n));
        }
        result.trajectories[j].push_back(value);
      }
    }
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.tuned_scales = config.proposal_scale;
  result.final_state = std::move(state);
  return result;
}

}  // namespace pm
