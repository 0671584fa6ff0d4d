#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pm/config.hpp"
#include "pm/diagnostics.hpp"
#include "pm/sampler.hpp"

namespace pm {

struct ExperimentArtifacts {
  RunResult pm;
  std::optional<RunResult> baseline;
  AcfResult pm_acf;
  std::optional<AcfResult> mh_acf;
  std::vector<ComparisonRow> comparison;
  double measured_cost_factor = 0.0;  // pm seconds per step / baseline seconds per step
  std::vector<std::string> files;
};

/// Plain single-level Metropolis run with the same seed: levels = 1, alpha = 0.
ExperimentConfig baseline_config(const ExperimentConfig& c);

/// Runs the chain (and the baseline when enabled) and computes diagnostics.
ExperimentArtifacts run_experiment(const ExperimentConfig& c);

/// Writes swap_rates.csv, trajectory_<obs>.csv, acf.csv and run_meta.txt.
void write_artifacts(const ExperimentConfig& c, ExperimentArtifacts& a, const std::string& dir);

ExperimentArtifacts run_bridge_experiment(const ExperimentConfig& c);
ExperimentArtifacts run_smoothing_experiment(const ExperimentConfig& c);

/// Reads a trajectory CSV (comment lines start with '#', then a header).
std::vector<double> read_trajectory_csv(const std::string& path);

/// CSV-safe real: 17 significant digits, empty for NaN.
std::string format_real(double v);

}  // namespace pm
