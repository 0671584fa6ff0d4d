// Command-line front end: bridge / smoothing experiments, oracle validation,
// and ACF recomputation from a trajectory file.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "pm/config.hpp"
#include "pm/diagnostics.hpp"
#include "pm/errors.hpp"
#include "pm/experiment.hpp"
#include "pm/validation.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::uint64_t> steps;
  bool baseline = false;
  std::optional<int> levels;
  std::optional<double> alpha;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON experiment configuration");
  app->add_option("--seed", o.seed, "master RNG seed");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--steps", o.steps, "measurement steps");
  app->add_flag("--baseline", o.baseline, "also run single-level Metropolis for comparison");
  app->add_option("--levels", o.levels, "number of levels (L + 1)");
  app->add_option("--alpha", o.alpha, "swap probability per step");
}

pm::ExperimentConfig resolve(const Overrides& o, pm::Problem problem) {
  pm::ExperimentConfig c = problem == pm::Problem::Bridge ? pm::bridge_defaults() : pm::smoothing_defaults();
  if (!o.config.empty()) c = pm::load_config(o.config);
  if (c.problem != problem) {
    throw pm::ConfigError(std::string("problem: config describes '") + pm::problem_name(c.problem) +
                          "' but subcommand is '" + pm::problem_name(problem) + "'");
  }
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.steps) c.steps = *o.steps;
  if (o.baseline) c.baseline = true;
  if (o.levels) c.levels = *o.levels;
  if (o.alpha) c.alpha = *o.alpha;
  c.validate();
  return c;
}

void report(const pm::ExperimentArtifacts& a) {
  std::printf("level_pair  attempts   accepts   rate\n");
  for (std::size_t i = 0; i < a.pm.swaps.pairs.size(); ++i) {
    const auto& p = a.pm.swaps.pairs[i];
    std::printf("%4zu/%-4zu %10llu %9llu   %.3f\n", i, i + 1, static_cast<unsigned long long>(p.attempts),
                static_cast<unsigned long long>(p.accepts), p.rate());
  }
  std::printf("midpoint IACT %.3g (pm)", a.pm_acf.iact);
  if (a.mh_acf) std::printf(", %.3g (baseline), measured cost factor %.2f", a.mh_acf->iact, a.measured_cost_factor);
  std::printf("\n");
  for (const auto& f : a.files) std::printf("wrote %s\n", f.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel marginalization sampler for conditioned SDE paths"};
  app.require_subcommand(1);

  Overrides bridge_opts, smooth_opts;
  auto* bridge = app.add_subcommand("bridge", "sample bridge paths between fixed endpoints");
  add_common(bridge, bridge_opts);
  auto* smoothing = app.add_subcommand("smoothing", "sample hidden paths given noisy observations");
  add_common(smoothing, smooth_opts);

  pm::ValidationOptions vopts;
  auto* validate = app.add_subcommand("validate", "run the oracle validation suite");
  validate->add_option("--seed", vopts.seed, "seed");
  validate->add_option("--samples", vopts.samples_per_row, "Monte Carlo samples per matrix row");
  validate->add_flag("--inject-sign-error", vopts.inject_sign_error,
                     "flip the swap acceptance ratio (the suite must then fail)");

  std::string acf_input, acf_baseline, acf_out = ".";
  int acf_max_lag = 2000;
  double acf_factor = 10.0;
  auto* acf_cmd = app.add_subcommand("acf", "recompute ACF/IACT from trajectory CSVs");
  acf_cmd->add_option("--input", acf_input, "trajectory CSV")->required();
  acf_cmd->add_option("--baseline-input", acf_baseline, "baseline trajectory CSV");
  acf_cmd->add_option("--max-lag", acf_max_lag, "largest lag");
  acf_cmd->add_option("--cost-factor", acf_factor, "baseline lag scaling");
  acf_cmd->add_option("--out", acf_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bridge) {
      report(pm::run_bridge_experiment(resolve(bridge_opts, pm::Problem::Bridge)));
    } else if (*smoothing) {
      report(pm::run_smoothing_experiment(resolve(smooth_opts, pm::Problem::Smoothing)));
    } else if (*validate) {
      bool ok = true;
      for (const auto& c : pm::run_validation(vopts)) {
        std::printf("%s  %s  (%s)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        ok = ok && c.pass;
      }
      return ok ? 0 : 1;
    } else if (*acf_cmd) {
      const auto series = pm::read_trajectory_csv(acf_input);
      const int lag = std::max(1, std::min(acf_max_lag, static_cast<int>(series.size()) - 1));
      const pm::AcfResult pm_acf = pm::acf(series, lag);
      std::optional<pm::AcfResult> mh;
      if (!acf_baseline.empty()) {
        const auto base = pm::read_trajectory_csv(acf_baseline);
        const int mh_lag = std::max(1, std::min(static_cast<int>(std::ceil(acf_factor * lag)),
                                                static_cast<int>(base.size()) - 1));
        mh = pm::acf(base, mh_lag);
      }
      std::filesystem::create_directories(acf_out);
      std::ofstream out(std::filesystem::path(acf_out) / "acf.csv", std::ios::binary);
      out << "# input=" << acf_input << "\n" << "lag,pm_acf,mh_acf_scaled\n";
      const auto rows = mh ? pm::cost_scaled_comparison(pm_acf, *mh, acf_factor)
                           : pm::cost_scaled_comparison(pm_acf, pm_acf, 1.0);
      for (const auto& r : rows) {
        out << r.lag << ',' << pm::format_real(r.pm_acf) << ',' << (mh ? pm::format_real(r.mh_acf_scaled) : "")
            << '\n';
      }
      std::printf("IACT %.4g (window %d%s)\n", pm_acf.iact, pm_acf.window, pm_acf.window_found ? "" : ", not converged");
      if (mh) std::printf("baseline IACT %.4g\n", mh->iact);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
