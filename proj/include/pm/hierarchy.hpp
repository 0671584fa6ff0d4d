#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pm/model.hpp"
#include "pm/rng.hpp"

namespace pm {

enum class Problem { Bridge, Smoothing };

const char* problem_name(Problem p);

/// Uniform time grid t_k = k * dt, k = 0..steps, with dt = horizon / steps.
struct GridSpec {
  double horizon = 10.0;
  int steps = 16384;  // power of two
  double z_minus = 0.0;
  double z_plus = 0.0;  // bridge only

  double dt() const { return horizon / steps; }
  double time(int k) const { return k * dt(); }
  void validate() const;
};

/// Level structure. Level i keeps every 2^i-th fine grid point; its even
/// positions (hat) coincide with level i+1 and its odd positions (tilde) are
/// the ones marginalized out between i and i+1.
class Hierarchy {
 public:
  Hierarchy(GridSpec grid, int levels);

  const GridSpec& grid() const { return grid_; }
  int levels() const { return levels_; }
  int coarsest() const { return levels_ - 1; }
  int stride(int level) const { return 1 << level; }
  double step(int level) const { return stride(level) * grid_.dt(); }
  /// Number of grid points at a level, K / 2^i + 1.
  std::size_t points(int level) const;
  /// Free variables: interior points for bridges, all points for smoothing.
  std::size_t dimension(int level, Problem problem) const;

  /// Fine-grid indices S_i, S-hat_i and S-tilde_i.
  std::vector<int> index_set(int level) const;
  std::vector<int> hat_set(int level) const;
  std::vector<int> tilde_set(int level) const;

 private:
  void check_level(int level) const;

  GridSpec grid_;
  int levels_;
};

/// Throws ConfigError when levels is not in [1, log2 K].
Hierarchy build_hierarchy(const GridSpec& grid, int levels);

/// State of one level: values on S_i in time order.
struct Path {
  int level = 0;
  std::vector<double> values;
  Problem problem = Problem::Bridge;
};

struct SplitValues {
  std::vector<double> hat;
  std::vector<double> tilde;
};

/// Even positions go to hat, odd positions to tilde. Length must be odd.
SplitValues split(std::span<const double> values);
std::vector<double> merge(std::span<const double> hat, std::span<const double> tilde);
void merge_into(std::span<const double> hat, std::span<const double> tilde, std::span<double> out);

/// Noisy observations H^j = r(Z^{s_j}) + chi^j with chi ~ mu, Z^0 ~ rho.
struct ObservationSet {
  std::vector<double> times;
  std::vector<double> values;
  ScalarFn log_noise;        // log mu
  ScalarFn observation_map;  // r
  ScalarFn log_initial;      // log rho, unnormalized is fine

  void validate(double horizon) const;
};

ScalarFn gaussian_log_density(double variance);
/// log rho(x) = -(x^2 - 1)^2, unnormalized.
ScalarFn double_well_log_prior();
ScalarFn flat_log_prior();
ScalarFn identity_map();

/// Observations at s_j = j for j = 0..10 of the horizon-10 problem, values
/// -1 for j <= 5 and +1 afterwards, Gaussian noise of the given variance.
ObservationSet standard_smoothing_observations(double noise_variance = 0.01);

/// Position (within the level-i array) of each observation. Every observation
/// goes to the nearest point of the coarsest grid (ties toward the earlier
/// point), so all levels see it at the same time and it is always a hat site.
std::vector<std::size_t> observation_positions(const Hierarchy& h, const ObservationSet& obs,
                                               int level);

/// -sum_k [V(x_k, x_{k+1}, 2^i dt) + log sigma(x_k)] over the level grid.
double log_q(const ModelSpec& model, const Hierarchy& h, int level, std::span<const double> values);

/// log q_i with both endpoints pinned to (z-, z+); throws ContractError if
/// they are not.
double log_pi_bridge(const ModelSpec& model, const Hierarchy& h, int level,
                     std::span<const double> values);

/// log q_i + log rho(x^0) + sum_j log mu(h^j - r(x^{s_j})).
double log_pi_smoothing(const ModelSpec& model, const Hierarchy& h, int level,
                        std::span<const double> values, const ObservationSet& obs);

/// Variance of each tilde site under the reference density, 2^{i-1} dt.
double reference_variance(const Hierarchy& h, int level);

/// log p_i(tilde | hat): independent Gaussians centred on neighbour midpoints.
double log_reference(const Hierarchy& h, int level, std::span<const double> hat,
                     std::span<const double> tilde);

struct ReferenceDraw {
  std::vector<double> tilde;
  double log_p = 0.0;
};

ReferenceDraw sample_reference(const Hierarchy& h, int level, std::span<const double> hat, Rng& rng);

/// Everything a kernel needs to evaluate level densities for one problem.
class PathTarget {
 public:
  static PathTarget bridge(ModelSpec model, Hierarchy hierarchy);
  static PathTarget smoothing(ModelSpec model, Hierarchy hierarchy, ObservationSet obs);

  Problem problem() const { return problem_; }
  const ModelSpec& model() const { return model_; }
  const Hierarchy& hierarchy() const { return hierarchy_; }
  const ObservationSet* observations() const {
    return problem_ == Problem::Smoothing ? &obs_ : nullptr;
  }
  int levels() const { return hierarchy_.levels(); }

  /// First and one-past-last free position at a level.
  std::size_t first_free(int level) const;
  std::size_t end_free(int level) const;

  double log_pi(int level, std::span<const double> values) const;
  /// log pi_i(proposal at position k) - log pi_i(current), touching only the
  /// terms that involve position k.
  double log_pi_site_delta(int level, std::span<const double> values, std::size_t k,
                           double proposal) const;
  /// Grid positions carrying observations at a level.
  const std::vector<std::size_t>& observation_positions(int level) const;

  bool endpoints_pinned(int level, std::span<const double> values) const;

  // Pieces for sweeps that cache drift evaluations (polynomial drift only).
  struct SiteDrift {
    double f = 0.0;
    double fp = 0.0;
  };
  bool polynomial() const { return polynomial_; }
  SiteDrift drift_at(double x) const {
    SiteDrift d;
    for (std::size_t p = drift_.size(); p-- > 0;) d.f = d.f * x + drift_[p];
    for (std::size_t p = deriv_.size(); p-- > 0;) d.fp = d.fp * x + deriv_[p];
    return d;
  }
  double v_with(SiteDrift d, double x, double y, double h) const {
    const double r = (1.0 - h * d.fp) * (y - x) - h * d.f;
    return r * r / (2.0 * sigma_ * sigma_ * h);
  }
  /// Initial-density and observation terms attached to position k.
  double site_extra(int level, std::size_t k, double xk) const;
  bool has_site_extra(int level, std::size_t k) const {
    return problem_ == Problem::Smoothing &&
           (k == 0 || !obs_at_[static_cast<std::size_t>(level)][k].empty());
  }

 private:
  PathTarget(ModelSpec model, Hierarchy hierarchy, Problem problem, ObservationSet obs);

  double local_log(int level, std::span<const double> values, std::size_t k, double xk) const;
  double v_term(double x, double y, double h) const;
  double sigma_term(double x) const;

  ModelSpec model_;
  Hierarchy hierarchy_;
  Problem problem_;
  ObservationSet obs_;
  std::vector<std::vector<std::size_t>> obs_positions_;
  // per level, per grid position: indices into obs_ of observations snapped there
  std::vector<std::vector<std::vector<std::size_t>>> obs_at_;
  std::vector<double> drift_;
  std::vector<double> deriv_;
  double sigma_ = 1.0;
  bool polynomial_ = false;
};

}  // namespace pm
