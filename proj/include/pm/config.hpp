#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pm/hierarchy.hpp"
#include "pm/kernels.hpp"
#include "pm/sampler.hpp"

namespace pm {

/// M per level pair: "i+1", "2^i", or an explicit list.
struct MSchedule {
  std::string expr = "i+1";
  std::vector<int> values;  // used when expr == "list"

  std::vector<int> resolve(int pairs) const;
};

struct ObservationConfig {
  std::vector<double> times;
  std::vector<double> values;
  double noise_variance = 0.01;
  std::string prior = "double_well";  // or "flat"
};

struct ExperimentConfig {
  Problem problem = Problem::Bridge;
  std::string model = "double_well";
  double model_rate = 1.0;  // OU only

  int grid_steps = 16384;  // K
  double horizon = 10.0;  // T
  double z_minus = 0.0;
  double z_plus = 0.0;

  int levels = 10;
  double alpha = 0.5;
  MSchedule m_schedule;
  SwapVariant variant = SwapVariant::CommonNoise;
  int sweeps = 1;

  std::uint64_t seed = 1;
  std::uint64_t burn_in = 0;  // 0 selects the default
  std::uint64_t steps = 200000;
  std::uint64_t thinning = 1;
  std::uint64_t tuning_window = 100;

  bool baseline = false;
  std::uint64_t baseline_steps = 0;  // 0 means same as steps

  ObservationConfig observations;

  int max_lag = 2000;
  double cost_factor = 10.0;

  std::string output_dir = "out";

  void validate() const;
};

ExperimentConfig bridge_defaults();
ExperimentConfig smoothing_defaults();

nlohmann::json to_json(const ExperimentConfig& c);
/// Missing keys keep the defaults of the named problem.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a over the canonical JSON, output directory excluded.
std::uint64_t config_hash(const ExperimentConfig& c);
std::string hex64(std::uint64_t v);

Hierarchy make_hierarchy(const ExperimentConfig& c);
PathTarget make_target(const ExperimentConfig& c);
KernelConfig make_kernel_config(const ExperimentConfig& c, const Hierarchy& h);
RunPlan make_plan(const ExperimentConfig& c);

}  // namespace pm
