#include "pm/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pm/errors.hpp"
#include "pm/simd/kernels.hpp"

namespace pm {

std::string format_real(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExperimentConfig baseline_config(const ExperimentConfig& c) {
  ExperimentConfig b = c;
  b.levels = 1;
  b.alpha = 0.0;
  b.baseline = false;
  if (c.baseline_steps != 0) {
    b.steps = c.baseline_steps;
    if (c.burn_in == 0) b.burn_in = default_burn_in(c.steps);
  }
  return b;
}

namespace {

int clamp_lag(int wanted, std::size_t n) {
  return std::max(1, std::min(wanted, static_cast<int>(n) - 1));
}

}  // namespace

ExperimentArtifacts run_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentArtifacts a;
  {
    const PathTarget target = make_target(c);
    a.pm = run(make_plan(c), make_kernel_config(c, target.hierarchy()), target);
  }
  const auto& series = a.pm.trajectories.front();
  a.pm_acf = acf(series, clamp_lag(c.max_lag, series.size()));
  if (c.baseline) {
    const ExperimentConfig b = baseline_config(c);
    const PathTarget target = make_target(b);
    a.baseline = run(make_plan(b), make_kernel_config(b, target.hierarchy()), target);
    const auto& mh = a.baseline->trajectories.front();
    const int mh_lag = static_cast<int>(std::ceil(c.cost_factor * c.max_lag));
    a.mh_acf = acf(mh, clamp_lag(mh_lag, mh.size()));
    a.comparison = cost_scaled_comparison(a.pm_acf, *a.mh_acf, c.cost_factor);
    const double pm_per_step = a.pm.seconds / static_cast<double>(c.steps);
    const double mh_per_step = a.baseline->seconds / static_cast<double>(b.steps);
    a.measured_cost_factor = mh_per_step > 0.0 ? pm_per_step / mh_per_step : 0.0;
  } else {
    for (std::size_t l = 0; l < a.pm_acf.acf.size(); ++l) {
      a.comparison.push_back({static_cast<int>(l), a.pm_acf.acf[l], std::nan("")});
    }
  }
  return a;
}

void write_artifacts(const ExperimentConfig& c, ExperimentArtifacts& a, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string stamp = "# config_hash=" + hex64(config_hash(c)) + " seed=" + std::to_string(c.seed) + "\n";
  auto open = [&](const std::string& name) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    a.files.push_back(path);
    return out;
  };
  {
    auto out = open("swap_rates.csv");
    out << stamp << "level_pair,attempts,accepts,rate,degenerate\n";
    for (std::size_t i = 0; i < a.pm.swaps.pairs.size(); ++i) {
      const auto& p = a.pm.swaps.pairs[i];
      out << i << '/' << i + 1 << ',' << p.attempts << ',' << p.accepts << ',' << format_real(p.rate()) << ','
          << p.degenerate << '\n';
    }
  }
  for (std::size_t j = 0; j < a.pm.names.size(); ++j) {
    auto out = open("trajectory_" + a.pm.names[j] + ".csv");
    out << stamp << "step,value\n";
    const auto thin = c.thinning;
    const auto& t = a.pm.trajectories[j];
    for (std::size_t n = 0; n < t.size(); ++n) out << (n + 1) * thin << ',' << format_real(t[n]) << '\n';
  }
  {
    auto out = open("acf.csv");
    out << stamp << "lag,pm_acf,mh_acf_scaled\n";
    for (const auto& r : a.comparison) {
      out << r.lag << ',' << format_real(r.pm_acf) << ',' << format_real(r.mh_acf_scaled) << '\n';
    }
  }
  {
    auto out = open("run_meta.txt");
    out << "config_hash " << hex64(config_hash(c)) << "\n";
    out << "seed " << c.seed << "\n";
    out << "simd " << simd::isa_name(simd::active_isa()) << "\n";
    out << "problem " << problem_name(c.problem) << "\n";
    out << "pm_seconds " << a.pm.seconds << "\n";
    out << "pm_iact " << a.pm_acf.iact << (a.pm_acf.window_found ? "" : " (window not found)") << "\n";
    const auto pm_cross = first_lag_below(a.pm_acf, 0.2);
    out << "pm_acf_below_0.2_at " << (pm_cross ? std::to_string(*pm_cross) : "not reached") << "\n";
    if (c.problem == Problem::Smoothing) {
      const Hierarchy h = make_hierarchy(c);
      const auto target = make_target(c);
      out << "observation_grid_times";
      for (std::size_t p : target.observation_positions(0)) out << ' ' << static_cast<double>(p) * h.step(0);
      out << "\n";
    }
    out << "tuned_scales";
    for (double s : a.pm.tuned_scales) out << ' ' << s;
    out << "\n";
    if (a.baseline) {
      out << "baseline_seconds " << a.baseline->seconds << "\n";
      out << "mh_iact " << a.mh_acf->iact << (a.mh_acf->window_found ? "" : " (window not found)") << "\n";
      const auto mh_cross = first_lag_below(*a.mh_acf, 0.2);
      out << "mh_acf_below_0.2_at "
          << (mh_cross ? std::to_string(*mh_cross) : "not reached by lag " + std::to_string(a.mh_acf->acf.size() - 1))
          << "\n";
      out << "cost_factor_assumed " << c.cost_factor << "\n";
      out << "cost_factor_measured " << a.measured_cost_factor << "\n";
    }
    out << "config " << to_json(c).dump() << "\n";
  }
}

ExperimentArtifacts run_bridge_experiment(const ExperimentConfig& c) {
  if (c.problem != Problem::Bridge) throw ConfigError("problem: bridge experiment needs problem = bridge");
  auto a = run_experiment(c);
  write_artifacts(c, a, c.output_dir);
  return a;
}

ExperimentArtifacts run_smoothing_experiment(const ExperimentConfig& c) {
  if (c.problem != Problem::Smoothing) throw ConfigError("problem: smoothing experiment needs problem = smoothing");
  auto a = run_experiment(c);
  write_artifacts(c, a, c.output_dir);
  return a;
}

std::vector<double> read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory '" + path + "'");
  std::vector<double> out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("trajectory: malformed line '" + line + "'");
    out.push_back(std::stod(line.substr(comma + 1)));
  }
  return out;
}

}  // namespace pm
