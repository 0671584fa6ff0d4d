#include "pm/config.hpp"

#include <fstream>
#include <sstream>

#include "pm/errors.hpp"

namespace pm {

using nlohmann::json;

std::vector<int> MSchedule::resolve(int pairs) const {
  if (expr == "i+1") return m_schedule_linear(pairs);
  if (expr == "2^i") return m_schedule_doubling(pairs);
  if (expr == "list") {
    if (static_cast<int>(values.size()) < pairs) {
      throw ConfigError("m_schedule: list has " + std::to_string(values.size()) + " entries, need " +
                        std::to_string(pairs));
    }
    return {values.begin(), values.begin() + pairs};
  }
  throw ConfigError("m_schedule: unknown expression '" + expr + "'");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& msg) { throw ConfigError(field + ": " + msg); };
  if (model != "double_well" && model != "ou" && model != "zero_drift") fail("model.name", "unknown model");
  if (model == "ou" && !(model_rate > 0.0)) fail("model.rate", "must be positive");
  try {
    GridSpec{horizon, grid_steps, z_minus, z_plus}.validate();
  } catch (const ConfigError& e) {
    fail("grid", e.what());
  }
  try {
    build_hierarchy(GridSpec{horizon, grid_steps, z_minus, z_plus}, levels);
  } catch (const ConfigError& e) {
    fail("levels", e.what());
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) fail("alpha", "must lie in [0, 1)");
  try {
    for (int m : m_schedule.resolve(levels - 1)) {
      if (m < 1) fail("m_schedule", "entries must be >= 1");
    }
  } catch (const ConfigError& e) {
    fail("m_schedule", e.what());
  }
  if (sweeps < 1) fail("sweeps", "must be >= 1");
  if (steps < 1) fail("plan.steps", "must be >= 1");
  if (thinning < 1) fail("plan.thinning", "must be >= 1");
  if (tuning_window < 1) fail("plan.tuning_window", "must be >= 1");
  if (max_lag < 1) fail("diagnostics.max_lag", "must be >= 1");
  if (!(cost_factor > 0.0)) fail("diagnostics.cost_factor", "must be positive");
  if (problem == Problem::Smoothing) {
    if (!(observations.noise_variance > 0.0)) fail("observations.noise_variance", "must be positive");
    if (observations.prior != "double_well" && observations.prior != "flat") fail("observations.prior", "unknown prior");
    if (observations.times.size() != observations.values.size()) fail("observations", "times/values length mismatch");
  }
}

ExperimentConfig bridge_defaults() {
  ExperimentConfig c;
  c.problem = Problem::Bridge;
  c.levels = 10;
  c.m_schedule.expr = "i+1";
  return c;
}

ExperimentConfig smoothing_defaults() {
  ExperimentConfig c;
  c.problem = Problem::Smoothing;
  c.levels = 8;
  c.m_schedule.expr = "2^i";
  const ObservationSet std_obs = standard_smoothing_observations();
  c.observations.times = std_obs.times;
  c.observations.values = std_obs.values;
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["problem"] = problem_name(c.problem);
  j["model"] = {{"name", c.model}, {"rate", c.model_rate}};
  j["grid"] = {{"K", c.grid_steps}, {"T", c.horizon}, {"z_minus", c.z_minus}, {"z_plus", c.z_plus}};
  j["levels"] = c.levels;
  j["alpha"] = c.alpha;
  if (c.m_schedule.expr == "list") {
    j["m_schedule"] = c.m_schedule.values;
  } else {
    j["m_schedule"] = c.m_schedule.expr;
  }
  j["swap_variant"] = swap_variant_name(c.variant);
  j["sweeps"] = c.sweeps;
  j["plan"] = {{"seed", c.seed},
               {"burn_in", c.burn_in},
               {"steps", c.steps},
               {"thinning", c.thinning},
               {"tuning_window", c.tuning_window}};
  j["baseline"] = c.baseline;
  j["baseline_steps"] = c.baseline_steps;
  j["observations"] = {{"times", c.observations.times},
                       {"values", c.observations.values},
                       {"noise_variance", c.observations.noise_variance},
                       {"prior", c.observations.prior}};
  j["diagnostics"] = {{"max_lag", c.max_lag}, {"cost_factor", c.cost_factor}};
  j["output_dir"] = c.output_dir;
  return j;
}

namespace {

template <class T>
void read(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception& e) {
    throw ConfigError(path + key + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  std::string problem = "bridge";
  read(j, "problem", problem, "");
  ExperimentConfig c;
  if (problem == "bridge") {
    c = bridge_defaults();
  } else if (problem == "smoothing") {
    c = smoothing_defaults();
  } else {
    throw ConfigError("problem: expected 'bridge' or 'smoothing'");
  }
  if (j.contains("model")) {
    read(j["model"], "name", c.model, "model.");
    read(j["model"], "rate", c.model_rate, "model.");
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    read(g, "K", c.grid_steps, "grid.");
    read(g, "T", c.horizon, "grid.");
    read(g, "z_minus", c.z_minus, "grid.");
    read(g, "z_plus", c.z_plus, "grid.");
  }
  read(j, "levels", c.levels, "");
  read(j, "alpha", c.alpha, "");
  if (j.contains("m_schedule")) {
    const auto& m = j["m_schedule"];
    if (m.is_string()) {
      c.m_schedule = {m.get<std::string>(), {}};
    } else if (m.is_array()) {
      c.m_schedule.expr = "list";
      read(j, "m_schedule", c.m_schedule.values, "");
    } else {
      throw ConfigError("m_schedule: expected a string or a list");
    }
  }
  if (j.contains("swap_variant")) {
    std::string v;
    read(j, "swap_variant", v, "");
    c.variant = swap_variant_from_name(v);
  }
  read(j, "sweeps", c.sweeps, "");
  if (j.contains("plan")) {
    const auto& p = j["plan"];
    read(p, "seed", c.seed, "plan.");
    read(p, "burn_in", c.burn_in, "plan.");
    read(p, "steps", c.steps, "plan.");
    read(p, "thinning", c.thinning, "plan.");
    read(p, "tuning_window", c.tuning_window, "plan.");
  }
  read(j, "baseline", c.baseline, "");
  read(j, "baseline_steps", c.baseline_steps, "");
  if (j.contains("observations")) {
    const auto& o = j["observations"];
    read(o, "times", c.observations.times, "observations.");
    read(o, "values", c.observations.values, "observations.");
    read(o, "noise_variance", c.observations.noise_variance, "observations.");
    read(o, "prior", c.observations.prior, "observations.");
  }
  if (j.contains("diagnostics")) {
    read(j["diagnostics"], "max_lag", c.max_lag, "diagnostics.");
    read(j["diagnostics"], "cost_factor", c.cost_factor, "diagnostics.");
  }
  read(j, "output_dir", c.output_dir, "");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

Hierarchy make_hierarchy(const ExperimentConfig& c) {
  return build_hierarchy(GridSpec{c.horizon, c.grid_steps, c.z_minus, c.z_plus}, c.levels);
}

PathTarget make_target(const ExperimentConfig& c) {
  ModelSpec model = model_by_name(c.model, c.model_rate);
  Hierarchy h = make_hierarchy(c);
  if (c.problem == Problem::Bridge) return PathTarget::bridge(std::move(model), std::move(h));
  ObservationSet obs;
  obs.times = c.observations.times;
  obs.values = c.observations.values;
  obs.log_noise = gaussian_log_density(c.observations.noise_variance);
  obs.observation_map = identity_map();
  obs.log_initial = c.observations.prior == "flat" ? flat_log_prior() : double_well_log_prior();
  return PathTarget::smoothing(std::move(model), std::move(h), std::move(obs));
}

KernelConfig make_kernel_config(const ExperimentConfig& c, const Hierarchy& h) {
  KernelConfig k;
  k.alpha = c.alpha;
  k.m_schedule = c.m_schedule.resolve(h.levels() - 1);
  k.proposal_scale = default_proposal_scales(h);
  k.sweeps = c.sweeps;
  k.variant = c.variant;
  return k;
}

RunPlan make_plan(const ExperimentConfig& c) {
  RunPlan p;
  p.seed = c.seed;
  p.steps = c.steps;
  p.burn_in = c.burn_in == 0 ? default_burn_in(c.steps) : c.burn_in;
  p.thinning = c.thinning;
  p.tuning_window = c.tuning_window;
  p.observables = {midpoint_observable()};
  return p;
}

}  // namespace pm
