#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "pm/hierarchy.hpp"
#include "pm/kernels.hpp"
#include "pm/model.hpp"

namespace pm::oracle {

// --- discrete toy -----------------------------------------------------------

/// Two-level target on finite sets. Level 0 holds (hat, tilde), level 1 a
/// single value in the hat set. States of the composite chain are triples
/// (hat, tilde, coarse).
struct DiscreteToy {
  int n_hat = 2;
  int n_tilde = 2;
  std::vector<double> pi0;  // [hat * n_tilde + tilde], unnormalized
  std::vector<double> pi1;  // [hat], unnormalized
  std::vector<double> ref;  // p(tilde | hat), rows sum to 1

  /// The 2x2x2 instance used throughout the tests.
  static DiscreteToy standard();
  /// Toy whose coarse table is the exact marginal of pi0.
  static DiscreteToy exact_marginals();

  void validate() const;
  int states() const { return n_hat * n_tilde * n_hat; }
  int index(int hat, int tilde, int coarse) const { return (hat * n_tilde + tilde) * n_hat + coarse; }
  void decode(int s, int& hat, int& tilde, int& coarse) const;
  /// Normalized product measure pi0 * pi1 over composite states.
  std::vector<double> stationary() const;

  // pair interface, values are integer codes stored as doubles
  std::size_t tilde_size() const { return 1; }
  double log_fine(std::span<const double> hat, std::span<const double> tilde) const;
  double log_coarse(std::span<const double> x) const;
  double log_reference(std::span<const double> hat, std::span<const double> tilde) const;
  void sample_reference(std::span<const double> hat, Rng& rng, std::span<double> out) const;
  double log_marginal(std::span<const double> hat) const;
  void sample_conditional(std::span<const double> hat, Rng& rng, std::span<double> out) const;
};

/// Dense row-major transition matrix over toy states.
struct Matrix {
  int n = 0;
  std::vector<double> p;
  double operator()(int i, int j) const { return p[static_cast<std::size_t>(i * n + j)]; }
  double& operator()(int i, int j) { return p[static_cast<std::size_t>(i * n + j)]; }
  static Matrix identity(int n);
  Matrix operator*(const Matrix& o) const;
};

/// Exact swap kernel, enumerated: acceptance via the kernels module, tilde
/// outcomes weighted by the tabulated conditional.
Matrix swap_exact_matrix(const DiscreteToy& toy);
/// Product of per-level Metropolis kernels with uniform proposals.
Matrix within_level_matrix(const DiscreteToy& toy);
/// (1 - alpha) T + alpha S T: swap attempted first, then every level moves.
Matrix composite_matrix(const Matrix& within, const Matrix& swap, double alpha);

double max_row_sum_error(const Matrix& m);
/// max |Pi(x) P(x->y) - Pi(y) P(y->x)|
double detailed_balance_residual(const Matrix& m, std::span<const double> pi);
/// max |(Pi P)(y) - Pi(y)|
double invariance_residual(const Matrix& m, std::span<const double> pi);

struct MonteCarloMatrix {
  Matrix freq;  // empirical transition probabilities
  std::uint64_t samples_per_row = 0;
};

/// Runs the M-sample swap `samples_per_row` times from every state.
MonteCarloMatrix swap_approx_matrix_mc(const DiscreteToy& toy, int m, SwapVariant variant,
                                       std::uint64_t samples_per_row, std::uint64_t seed,
                                       SwapFaults faults = {});

struct BalanceCheck {
  double max_abs_residual = 0.0;
  double max_z = 0.0;  // residual / standard error, worst pair
  bool pass = false;
};

/// Pairwise detailed-balance residuals of an estimated matrix with binomial
/// standard errors; passes when every |residual| <= z_limit * SE.
BalanceCheck mc_detailed_balance(const MonteCarloMatrix& mc, std::span<const double> pi, double z_limit = 3.0);

/// One Metropolis update of each level of the toy (uniform proposals).
void toy_within_level_step(const DiscreteToy& toy, int& hat, int& tilde, int& coarse, Rng& rng);

// --- Gaussian analytics for linear drift -----------------------------------

/// f(x) = -rate * x with constant sigma. rate = 0 is Brownian motion.
struct LinearSde {
  double rate = 0.0;
  double sigma = 1.0;
};

/// Extracts rate/sigma from a model's polynomial form; UnsupportedError for
/// anything that is not -a x with constant sigma.
LinearSde linear_sde_from(const ModelSpec& model);

/// Precision matrix Q of the level-i density over all grid points, assembled
/// term by term from the one-step quadratic: log density = -x'Qx/2 - (n-1) log sigma.
Eigen::MatrixXd level_precision(const LinearSde& sde, const Hierarchy& h, int level);

double gaussian_level_log_density(const LinearSde& sde, const Hierarchy& h, int level,
                                  std::span<const double> values);

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Moments of the interior points of a bridge at a level, endpoints pinned.
GaussianMoments gaussian_bridge_moments(const LinearSde& sde, const Hierarchy& h, int level);

/// log of the tilde-marginal of level i at `hat` (values on S-hat_i), up to a
/// hat-independent constant, via the Schur complement.
double gaussian_marginal_log(const LinearSde& sde, const Hierarchy& h, int level, std::span<const double> hat);
double gaussian_marginal_log_ratio(const LinearSde& sde, const Hierarchy& h, int level,
                                   std::span<const double> hat_a, std::span<const double> hat_b);
/// Zero-drift only: the tilde-marginal of level i is the coarse density with
/// step 2h, so the ratio is a difference of coarse quadratic sums.
double telescoped_marginal_log_ratio(double sigma, const Hierarchy& h, int level,
                                     std::span<const double> hat_a, std::span<const double> hat_b);

/// Exact marginal and conditional sampler for swap_exact on a linear target.
ExactLevelOracle gaussian_exact_oracle(const LinearSde& sde, const Hierarchy& h, int level);

}  // namespace pm::oracle
