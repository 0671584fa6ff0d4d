#include "pm/hierarchy.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "pm/errors.hpp"
#include "pm/simd/kernels.hpp"

namespace pm {

const char* problem_name(Problem p) { return p == Problem::Bridge ? "bridge" : "smoothing"; }

void GridSpec::validate() const {
  if (steps <= 0 || !std::has_single_bit(static_cast<unsigned>(steps))) {
    throw ConfigError("grid.steps must be a positive power of two");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("grid.horizon must be positive");
  if (dt() * steps != horizon) throw ConfigError("grid: dt * steps does not reproduce horizon");
}

Hierarchy::Hierarchy(GridSpec grid, int levels) : grid_(grid), levels_(levels) {
  grid_.validate();
  const int log2k = std::countr_zero(static_cast<unsigned>(grid_.steps));
  if (levels < 1 || levels > log2k) {
    throw ConfigError("hierarchy: levels must lie in [1, log2(K)] = [1, " + std::to_string(log2k) +
                      "], got " + std::to_string(levels));
  }
}

Hierarchy build_hierarchy(const GridSpec& grid, int levels) { return Hierarchy(grid, levels); }

void Hierarchy::check_level(int level) const {
  if (level < 0 || level >= levels_) throw ArgumentError("level out of range");
}

std::size_t Hierarchy::points(int level) const {
  check_level(level);
  return static_cast<std::size_t>(grid_.steps / stride(level)) + 1;
}

std::size_t Hierarchy::dimension(int level, Problem problem) const {
  const std::size_t n = points(level);
  return problem == Problem::Bridge ? n - 2 : n;
}

std::vector<int> Hierarchy::index_set(int level) const {
  check_level(level);
  std::vector<int> s;
  for (int k = 0; k <= grid_.steps; k += stride(level)) s.push_back(k);
  return s;
}

std::vector<int> Hierarchy::hat_set(int level) const {
  check_level(level);
  std::vector<int> s;
  for (int k = 0; k <= grid_.steps; k += 2 * stride(level)) s.push_back(k);
  return s;
}

std::vector<int> Hierarchy::tilde_set(int level) const {
  check_level(level);
  std::vector<int> s;
  for (int k = stride(level); k < grid_.steps; k += 2 * stride(level)) s.push_back(k);
  return s;
}

SplitValues split(std::span<const double> values) {
  if (values.size() % 2 == 0) throw ArgumentError("split: path length must be odd");
  SplitValues out;
  out.hat.reserve(values.size() / 2 + 1);
  out.tilde.reserve(values.size() / 2);
  for (std::size_t k = 0; k < values.size(); ++k) {
    (k % 2 == 0 ? out.hat : out.tilde).push_back(values[k]);
  }
  return out;
}

void merge_into(std::span<const double> hat, std::span<const double> tilde, std::span<double> out) {
  if (hat.size() != tilde.size() + 1 || out.size() != hat.size() + tilde.size()) {
    throw ArgumentError("merge: hat must have exactly one more entry than tilde");
  }
  for (std::size_t k = 0; k < tilde.size(); ++k) {
    out[2 * k] = hat[k];
    out[2 * k + 1] = tilde[k];
  }
  out[2 * tilde.size()] = hat.back();
}

std::vector<double> merge(std::span<const double> hat, std::span<const double> tilde) {
  if (hat.size() != tilde.size() + 1) {
    throw ArgumentError("merge: hat must have exactly one more entry than tilde");
  }
  std::vector<double> out(hat.size() + tilde.size());
  merge_into(hat, tilde, out);
  return out;
}

void ObservationSet::validate(double horizon) const {
  if (times.size() != values.size()) throw ConfigError("observations: times/values length mismatch");
  if (!log_noise || !observation_map || !log_initial) {
    throw ConfigError("observations: noise, map and initial densities are required");
  }
  if (times.empty()) return;
  if (times.front() != 0.0) throw ConfigError("observations: first time must be 0");
  if (times.back() != horizon) throw ConfigError("observations: last time must equal the horizon");
  for (std::size_t j = 1; j < times.size(); ++j) {
    if (!(times[j] > times[j - 1])) throw ConfigError("observations: times must increase strictly");
  }
}

ScalarFn gaussian_log_density(double variance) {
  if (!(variance > 0.0)) throw ArgumentError("gaussian_log_density: variance must be positive");
  const double norm = -0.5 * std::log(2.0 * std::numbers::pi * variance);
  return [variance, norm](double x) { return norm - x * x / (2.0 * variance); };
}

ScalarFn double_well_log_prior() {
  return [](double x) {
    const double u = x * x - 1.0;
    return -u * u;
  };
}

ScalarFn flat_log_prior() {
  return [](double) { return 0.0; };
}

ScalarFn identity_map() {
  return [](double x) { return x; };
}

ObservationSet standard_smoothing_observations(double noise_variance) {
  ObservationSet obs;
  for (int j = 0; j <= 10; ++j) {
    obs.times.push_back(static_cast<double>(j));
    obs.values.push_back(j <= 5 ? -1.0 : 1.0);
  }
  obs.log_noise = gaussian_log_density(noise_variance);
  obs.observation_map = identity_map();
  obs.log_initial = double_well_log_prior();
  return obs;
}

std::vector<std::size_t> observation_positions(const Hierarchy& h, const ObservationSet& obs,
                                               int level) {
  if (level < 0 || level >= h.levels()) throw ArgumentError("observation_positions: level out of range");
  const int coarsest = h.coarsest();
  const std::size_t last = h.points(coarsest) - 1;
  const std::size_t scale = static_cast<std::size_t>(1) << (coarsest - level);
  std::vector<std::size_t> out;
  out.reserve(obs.times.size());
  for (double s : obs.times) {
    const double x = s / h.step(coarsest);
    if (!std::isfinite(x) || x < -0.5 || x > static_cast<double>(last) + 0.5) {
      throw ConfigError("observation time outside the grid");
    }
    const double lo = std::floor(x);
    std::size_t p = static_cast<std::size_t>(std::max(0.0, x - lo > 0.5 ? lo + 1.0 : lo));
    out.push_back(std::min(p, last) * scale);
  }
  return out;
}

double log_q(const ModelSpec& model, const Hierarchy& h, int level, std::span<const double> values) {
  if (values.size() != h.points(level)) throw ArgumentError("log_q: path length does not match level");
  const double step = h.step(level);
  double out;
  if (model.polynomial) {
    const auto& c = model.polynomial->drift_coeffs;
    std::vector<double> d;
    for (std::size_t p = 1; p < c.size(); ++p) d.push_back(static_cast<double>(p) * c[p]);
    const double s = model.polynomial->sigma;
    const double r2 = simd::active().poly_residual_sq(c.data(), c.size(), d.data(), d.size(), step,
                                                      values.data(), values.size());
    out = -r2 / (2.0 * s * s * step) - static_cast<double>(values.size() - 1) * std::log(s);
  } else {
    out = 0.0;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      out += log_sigma_correction(model, values[k]) - potential_v(model, values[k], values[k + 1], step);
    }
  }
  if (!std::isfinite(out)) throw NumericalError("log_q: non-finite log density");
  return out;
}

double log_pi_bridge(const ModelSpec& model, const Hierarchy& h, int level,
                     std::span<const double> values) {
  if (values.size() != h.points(level)) throw ArgumentError("log_pi_bridge: path length mismatch");
  if (values.front() != h.grid().z_minus || values.back() != h.grid().z_plus) {
    throw ContractError("log_pi_bridge: bridge endpoints must equal (z-, z+)");
  }
  return log_q(model, h, level, values);
}

double log_pi_smoothing(const ModelSpec& model, const Hierarchy& h, int level,
                        std::span<const double> values, const ObservationSet& obs) {
  obs.validate(h.grid().horizon);
  const auto pos = observation_positions(h, obs, level);
  double out = log_q(model, h, level, values) + obs.log_initial(values.front());
  for (std::size_t j = 0; j < pos.size(); ++j) {
    out += obs.log_noise(obs.values[j] - obs.observation_map(values[pos[j]]));
  }
  if (!std::isfinite(out)) throw NumericalError("log_pi_smoothing: non-finite log density");
  return out;
}

double reference_variance(const Hierarchy& h, int level) { return 0.5 * h.step(level); }

double log_reference(const Hierarchy& h, int level, std::span<const double> hat,
                     std::span<const double> tilde) {
  if (hat.size() != tilde.size() + 1 || hat.size() != h.points(level) / 2 + 1) {
    throw ArgumentError("log_reference: hat/tilde sizes do not match level");
  }
  const double var = reference_variance(h, level);
  const double r2 = simd::active().midpoint_residual_sq(hat.data(), tilde.data(), tilde.size());
  return -r2 / (2.0 * var) -
         0.5 * static_cast<double>(tilde.size()) * std::log(2.0 * std::numbers::pi * var);
}

ReferenceDraw sample_reference(const Hierarchy& h, int level, std::span<const double> hat, Rng& rng) {
  if (hat.size() != h.points(level) / 2 + 1) throw ArgumentError("sample_reference: hat size mismatch");
  const double sd = std::sqrt(reference_variance(h, level));
  ReferenceDraw out;
  out.tilde.resize(hat.size() - 1);
  for (std::size_t k = 0; k < out.tilde.size(); ++k) {
    out.tilde[k] = 0.5 * (hat[k] + hat[k + 1]) + sd * rng.normal();
  }
  out.log_p = log_reference(h, level, hat, out.tilde);
  return out;
}

// ---------------------------------------------------------------------------

PathTarget::PathTarget(ModelSpec model, Hierarchy hierarchy, Problem problem, ObservationSet obs)
    : model_(std::move(model)), hierarchy_(std::move(hierarchy)), problem_(problem), obs_(std::move(obs)) {
  if (model_.polynomial) {
    polynomial_ = true;
    drift_ = model_.polynomial->drift_coeffs;
    for (std::size_t p = 1; p < drift_.size(); ++p) deriv_.push_back(static_cast<double>(p) * drift_[p]);
    sigma_ = model_.polynomial->sigma;
  }
  if (problem_ == Problem::Smoothing) {
    obs_.validate(hierarchy_.grid().horizon);
    for (int i = 0; i < hierarchy_.levels(); ++i) {
      obs_positions_.push_back(pm::observation_positions(hierarchy_, obs_, i));
      std::vector<std::vector<std::size_t>> at(hierarchy_.points(i));
      for (std::size_t j = 0; j < obs_positions_.back().size(); ++j) at[obs_positions_.back()[j]].push_back(j);
      obs_at_.push_back(std::move(at));
    }
  } else {
    obs_positions_.resize(hierarchy_.levels());
  }
}

PathTarget PathTarget::bridge(ModelSpec model, Hierarchy hierarchy) {
  return PathTarget(std::move(model), std::move(hierarchy), Problem::Bridge, {});
}

PathTarget PathTarget::smoothing(ModelSpec model, Hierarchy hierarchy, ObservationSet obs) {
  return PathTarget(std::move(model), std::move(hierarchy), Problem::Smoothing, std::move(obs));
}

std::size_t PathTarget::first_free(int) const { return problem_ == Problem::Bridge ? 1 : 0; }

std::size_t PathTarget::end_free(int level) const {
  const std::size_t n = hierarchy_.points(level);
  return problem_ == Problem::Bridge ? n - 1 : n;
}

const std::vector<std::size_t>& PathTarget::observation_positions(int level) const {
  return obs_positions_.at(static_cast<std::size_t>(level));
}

bool PathTarget::endpoints_pinned(int level, std::span<const double> values) const {
  if (problem_ != Problem::Bridge) return true;
  return values.size() == hierarchy_.points(level) && values.front() == hierarchy_.grid().z_minus &&
         values.back() == hierarchy_.grid().z_plus;
}

double PathTarget::log_pi(int level, std::span<const double> values) const {
  if (problem_ == Problem::Bridge) return log_pi_bridge(model_, hierarchy_, level, values);
  double out = log_q(model_, hierarchy_, level, values) + obs_.log_initial(values.front());
  const auto& pos = obs_positions_[static_cast<std::size_t>(level)];
  for (std::size_t j = 0; j < pos.size(); ++j) {
    out += obs_.log_noise(obs_.values[j] - obs_.observation_map(values[pos[j]]));
  }
  if (!std::isfinite(out)) throw NumericalError("log_pi: non-finite log density");
  return out;
}

double PathTarget::v_term(double x, double y, double h) const {
  if (!polynomial_) return potential_v(model_, x, y, h);
  return v_with(drift_at(x), x, y, h);
}

double PathTarget::sigma_term(double x) const {
  return polynomial_ ? -std::log(sigma_) : log_sigma_correction(model_, x);
}

double PathTarget::local_log(int level, std::span<const double> values, std::size_t k, double xk) const {
  const double h = hierarchy_.step(level);
  double out = 0.0;
  if (k > 0) out -= v_term(values[k - 1], xk, h);
  if (k + 1 < values.size()) out += sigma_term(xk) - v_term(xk, values[k + 1], h);
  if (problem_ == Problem::Smoothing) out += site_extra(level, k, xk);
  return out;
}

double PathTarget::site_extra(int level, std::size_t k, double xk) const {
  if (problem_ != Problem::Smoothing) return 0.0;
  double out = k == 0 ? obs_.log_initial(xk) : 0.0;
  for (std::size_t j : obs_at_[static_cast<std::size_t>(level)][k]) {
    out += obs_.log_noise(obs_.values[j] - obs_.observation_map(xk));
  }
  return out;
}

double PathTarget::log_pi_site_delta(int level, std::span<const double> values, std::size_t k,
                                     double proposal) const {
  return local_log(level, values, k, proposal) - local_log(level, values, k, values[k]);
}

}  // namespace pm
