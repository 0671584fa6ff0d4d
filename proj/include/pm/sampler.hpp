#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pm/diagnostics.hpp"
#include "pm/kernels.hpp"

namespace pm {

struct Observable {
  std::string name;
  std::function<double(const ChainState&)> fn;
};

/// Value of the level-0 path at time T/2.
Observable midpoint_observable();

struct RunPlan {
  std::uint64_t burn_in = 10000;
  std::uint64_t steps = 100000;
  std::uint64_t thinning = 1;
  std::uint64_t seed = 1;
  std::vector<Observable> observables;
  std::uint64_t tuning_window = 100;
  bool tune = true;
  double init_jitter = 1.0;  // 0 starts from the deterministic line

  void validate() const;
};

/// 10% of the measurement steps, at least 10^4.
std::uint64_t default_burn_in(std::uint64_t steps);

/// Straight-line start with N(0, stride * dt / 4) jitter at free sites. Bridge
/// paths join (z-, z+); smoothing paths join the first and last observation.
ChainState init_state(const PathTarget& target, std::uint64_t seed, double jitter = 1.0);

struct RunResult {
  std::vector<std::string> names;
  std::vector<std::vector<double>> trajectories;
  SwapRecord swaps;
  std::vector<double> tuned_scales;
  std::vector<MhStats> mh_stats;  // measurement phase
  ChainState final_state;
  double seconds = 0.0;           // wall clock, measurement phase only
};

/// Burn-in (with proposal tuning toward a 30-50% site acceptance), then the
/// measurement phase. Swap statistics and trajectories cover measurement only.
RunResult run(const RunPlan& plan, KernelConfig config, const PathTarget& target);

}  // namespace pm
