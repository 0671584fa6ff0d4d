#include "pm/oracle.hpp"

#include <cmath>
#include <memory>
#include <numeric>

#include "pm/errors.hpp"

namespace pm::oracle {

namespace {

int code(std::span<const double> v) { return static_cast<int>(v[0]); }

int draw_from_row(std::span<const double> row, double u) {
  const double total = std::accumulate(row.begin(), row.end(), 0.0);
  double cum = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    cum += row[j];
    if (u * total < cum) return static_cast<int>(j);
  }
  return static_cast<int>(row.size()) - 1;
}

}  // namespace

DiscreteToy DiscreteToy::standard() {
  DiscreteToy t;
  t.pi0 = {1.0, 3.0, 2.0, 0.5};
  t.pi1 = {0.7, 1.9};
  t.ref = {0.6, 0.4, 0.3, 0.7};
  return t;
}

DiscreteToy DiscreteToy::exact_marginals() {
  DiscreteToy t = standard();
  t.pi1 = {t.pi0[0] + t.pi0[1], t.pi0[2] + t.pi0[3]};
  return t;
}

void DiscreteToy::validate() const {
  if (n_hat < 1 || n_tilde < 1) throw ArgumentError("toy: empty state set");
  const auto n0 = static_cast<std::size_t>(n_hat * n_tilde);
  if (pi0.size() != n0 || ref.size() != n0 || pi1.size() != static_cast<std::size_t>(n_hat)) {
    throw ArgumentError("toy: table sizes do not match state sets");
  }
  for (double x : pi0) if (!(x > 0.0)) throw ArgumentError("toy: masses must be positive");
  for (double x : pi1) if (!(x > 0.0)) throw ArgumentError("toy: masses must be positive");
  for (double x : ref) if (!(x > 0.0)) throw ArgumentError("toy: reference must be positive");
}

void DiscreteToy::decode(int s, int& hat, int& tilde, int& coarse) const {
  coarse = s % n_hat;
  const int fine = s / n_hat;
  tilde = fine % n_tilde;
  hat = fine / n_tilde;
}

std::vector<double> DiscreteToy::stationary() const {
  std::vector<double> pi(static_cast<std::size_t>(states()));
  double z = 0.0;
  for (int s = 0; s < states(); ++s) {
    int a, t, c;
    decode(s, a, t, c);
    pi[static_cast<std::size_t>(s)] = pi0[static_cast<std::size_t>(a * n_tilde + t)] * pi1[static_cast<std::size_t>(c)];
    z += pi[static_cast<std::size_t>(s)];
  }
  for (auto& x : pi) x /= z;
  return pi;
}

double DiscreteToy::log_fine(std::span<const double> hat, std::span<const double> tilde) const {
  return std::log(pi0[static_cast<std::size_t>(code(hat) * n_tilde + code(tilde))]);
}

double DiscreteToy::log_coarse(std::span<const double> x) const {
  return std::log(pi1[static_cast<std::size_t>(code(x))]);
}

double DiscreteToy::log_reference(std::span<const double> hat, std::span<const double> tilde) const {
  return std::log(ref[static_cast<std::size_t>(code(hat) * n_tilde + code(tilde))]);
}

void DiscreteToy::sample_reference(std::span<const double> hat, Rng& rng, std::span<double> out) const {
  const auto row = std::span<const double>(ref).subspan(static_cast<std::size_t>(code(hat) * n_tilde),
                                                        static_cast<std::size_t>(n_tilde));
  out[0] = draw_from_row(row, rng.uniform());
}

double DiscreteToy::log_marginal(std::span<const double> hat) const {
  double s = 0.0;
  for (int t = 0; t < n_tilde; ++t) s += pi0[static_cast<std::size_t>(code(hat) * n_tilde + t)];
  return std::log(s);
}

void DiscreteToy::sample_conditional(std::span<const double> hat, Rng& rng, std::span<double> out) const {
  const auto row = std::span<const double>(pi0).subspan(static_cast<std::size_t>(code(hat) * n_tilde),
                                                        static_cast<std::size_t>(n_tilde));
  out[0] = draw_from_row(row, rng.uniform());
}

Matrix Matrix::identity(int n) {
  Matrix m;
  m.n = n;
  m.p.assign(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::operator*(const Matrix& o) const {
  Matrix r;
  r.n = n;
  r.p.assign(p.size(), 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) r(i, j) += (*this)(i, k) * o(k, j);
  return r;
}

Matrix swap_exact_matrix(const DiscreteToy& toy) {
  toy.validate();
  Matrix m;
  m.n = toy.states();
  m.p.assign(static_cast<std::size_t>(m.n * m.n), 0.0);
  for (int s = 0; s < m.n; ++s) {
    int a, t, c;
    toy.decode(s, a, t, c);
    const double hat[1] = {static_cast<double>(a)};
    const double coarse[1] = {static_cast<double>(c)};
    const double accept = std::exp(exact_swap_log_acceptance(toy, hat, coarse));
    const double z = std::exp(toy.log_marginal(coarse));
    for (int tp = 0; tp < toy.n_tilde; ++tp) {
      const double cond = toy.pi0[static_cast<std::size_t>(c * toy.n_tilde + tp)] / z;
      m(s, toy.index(c, tp, a)) += accept * cond;
    }
    m(s, s) += 1.0 - accept;
  }
  return m;
}

Matrix within_level_matrix(const DiscreteToy& toy) {
  toy.validate();
  const int n0 = toy.n_hat * toy.n_tilde;
  const int n1 = toy.n_hat;
  auto metropolis = [](std::span<const double> w) {
    const int n = static_cast<int>(w.size());
    std::vector<double> k(static_cast<std::size_t>(n * n), 0.0);
    for (int x = 0; x < n; ++x) {
      double stay = 1.0;
      for (int y = 0; y < n; ++y) {
        if (y == x) continue;
        const double p = std::min(1.0, w[static_cast<std::size_t>(y)] / w[static_cast<std::size_t>(x)]) / n;
        k[static_cast<std::size_t>(x * n + y)] = p;
        stay -= p;
      }
      k[static_cast<std::size_t>(x * n + x)] = stay;
    }
    return k;
  };
  const auto t0 = metropolis(toy.pi0);
  const auto t1 = metropolis(toy.pi1);
  Matrix m;
  m.n = toy.states();
  m.p.assign(static_cast<std::size_t>(m.n * m.n), 0.0);
  for (int x0 = 0; x0 < n0; ++x0)
    for (int x1 = 0; x1 < n1; ++x1)
      for (int y0 = 0; y0 < n0; ++y0)
        for (int y1 = 0; y1 < n1; ++y1) {
          m(x0 * n1 + x1, y0 * n1 + y1) =
              t0[static_cast<std::size_t>(x0 * n0 + y0)] * t1[static_cast<std::size_t>(x1 * n1 + y1)];
        }
  return m;
}

Matrix composite_matrix(const Matrix& within, const Matrix& swap, double alpha) {
  const Matrix st = swap * within;
  Matrix m = within;
  for (std::size_t k = 0; k < m.p.size(); ++k) m.p[k] = (1.0 - alpha) * within.p[k] + alpha * st.p[k];
  return m;
}

double max_row_sum_error(const Matrix& m) {
  double worst = 0.0;
  for (int i = 0; i < m.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.n; ++j) s += m(i, j);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

double detailed_balance_residual(const Matrix& m, std::span<const double> pi) {
  double worst = 0.0;
  for (int x = 0; x < m.n; ++x)
    for (int y = 0; y < m.n; ++y) {
      worst = std::max(worst, std::abs(pi[static_cast<std::size_t>(x)] * m(x, y) -
                                       pi[static_cast<std::size_t>(y)] * m(y, x)));
    }
  return worst;
}

double invariance_residual(const Matrix& m, std::span<const double> pi) {
  double worst = 0.0;
  for (int y = 0; y < m.n; ++y) {
    double s = 0.0;
    for (int x = 0; x < m.n; ++x) s += pi[static_cast<std::size_t>(x)] * m(x, y);
    worst = std::max(worst, std::abs(s - pi[static_cast<std::size_t>(y)]));
  }
  return worst;
}

MonteCarloMatrix swap_approx_matrix_mc(const DiscreteToy& toy, int m, SwapVariant variant,
                                       std::uint64_t samples_per_row, std::uint64_t seed,
                                       SwapFaults faults) {
  toy.validate();
  MonteCarloMatrix mc;
  mc.samples_per_row = samples_per_row;
  mc.freq.n = toy.states();
  mc.freq.p.assign(static_cast<std::size_t>(mc.freq.n * mc.freq.n), 0.0);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(mc.freq.n));
  for (int s = 0; s < mc.freq.n; ++s) {
    int a, t, c;
    toy.decode(s, a, t, c);
    const double hat[1] = {static_cast<double>(a)};
    const double tilde[1] = {static_cast<double>(t)};
    const double coarse[1] = {static_cast<double>(c)};
    double new_tilde[1] = {0.0};
    Rng rng(seed, {Purpose::Test, static_cast<std::uint32_t>(s)});
    std::fill(counts.begin(), counts.end(), 0);
    for (std::uint64_t n = 0; n < samples_per_row; ++n) {
      const auto out = approx_swap_core(toy, hat, tilde, coarse, m, variant, rng, new_tilde, faults);
      const int dest = out.accepted ? toy.index(c, static_cast<int>(new_tilde[0]), a) : s;
      ++counts[static_cast<std::size_t>(dest)];
    }
    for (int y = 0; y < mc.freq.n; ++y) {
      mc.freq(s, y) = static_cast<double>(counts[static_cast<std::size_t>(y)]) / static_cast<double>(samples_per_row);
    }
  }
  return mc;
}

BalanceCheck mc_detailed_balance(const MonteCarloMatrix& mc, std::span<const double> pi, double z_limit) {
  BalanceCheck out;
  out.pass = true;
  const auto n = static_cast<double>(mc.samples_per_row);
  for (int x = 0; x < mc.freq.n; ++x)
    for (int y = x + 1; y < mc.freq.n; ++y) {
      const double px = pi[static_cast<std::size_t>(x)], py = pi[static_cast<std::size_t>(y)];
      const double fxy = mc.freq(x, y), fyx = mc.freq(y, x);
      const double r = px * fxy - py * fyx;
      const double var = px * px * fxy * (1.0 - fxy) / n + py * py * fyx * (1.0 - fyx) / n;
      out.max_abs_residual = std::max(out.max_abs_residual, std::abs(r));
      if (var == 0.0) {
        if (r != 0.0) {
          out.max_z = std::numeric_limits<double>::infinity();
          out.pass = false;
        }
        continue;
      }
      const double z = std::abs(r) / std::sqrt(var);
      out.max_z = std::max(out.max_z, z);
      if (z > z_limit) out.pass = false;
    }
  return out;
}

void toy_within_level_step(const DiscreteToy& toy, int& hat, int& tilde, int& coarse, Rng& rng) {
  const int n0 = toy.n_hat * toy.n_tilde;
  const int x0 = hat * toy.n_tilde + tilde;
  const int y0 = std::min(n0 - 1, static_cast<int>(rng.uniform() * n0));
  if (rng.uniform() * toy.pi0[static_cast<std::size_t>(x0)] < toy.pi0[static_cast<std::size_t>(y0)]) {
    hat = y0 / toy.n_tilde;
    tilde = y0 % toy.n_tilde;
  }
  const int y1 = std::min(toy.n_hat - 1, static_cast<int>(rng.uniform() * toy.n_hat));
  if (rng.uniform() * toy.pi1[static_cast<std::size_t>(coarse)] < toy.pi1[static_cast<std::size_t>(y1)]) {
    coarse = y1;
  }
}

// ---------------------------------------------------------------------------

LinearSde linear_sde_from(const ModelSpec& model) {
  if (!model.polynomial) throw UnsupportedError("oracle: model has no closed form");
  const auto& c = model.polynomial->drift_coeffs;
  if (c.size() > 2 || (!c.empty() && c[0] != 0.0)) {
    throw UnsupportedError("oracle: only f(x) = -a x drifts are Gaussian here");
  }
  return {c.size() == 2 ? -c[1] : 0.0, model.polynomial->sigma};
}

Eigen::MatrixXd level_precision(const LinearSde& sde, const Hierarchy& h, int level) {
  const auto n = static_cast<Eigen::Index>(h.points(level));
  const double step = h.step(level);
  const double w = 1.0 / (sde.sigma * sde.sigma * step);
  // one step contributes w * (c y - x)^2 / 2
  const double c = 1.0 + sde.rate * step;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    q(k, k) += w;
    q(k + 1, k + 1) += w * c * c;
    q(k, k + 1) -= w * c;
    q(k + 1, k) -= w * c;
  }
  return q;
}

double gaussian_level_log_density(const LinearSde& sde, const Hierarchy& h, int level,
                                  std::span<const double> values) {
  const Eigen::MatrixXd q = level_precision(sde, h, level);
  const Eigen::Map<const Eigen::VectorXd> x(values.data(), static_cast<Eigen::Index>(values.size()));
  return -0.5 * x.dot(q * x) - static_cast<double>(values.size() - 1) * std::log(sde.sigma);
}

GaussianMoments gaussian_bridge_moments(const LinearSde& sde, const Hierarchy& h, int level) {
  const Eigen::MatrixXd q = level_precision(sde, h, level);
  const Eigen::Index n = q.rows();
  const Eigen::Index m = n - 2;
  const Eigen::MatrixXd qff = q.block(1, 1, m, m);
  Eigen::VectorXd rhs = -(q.block(1, 0, m, 1) * h.grid().z_minus + q.block(1, n - 1, m, 1) * h.grid().z_plus);
  Eigen::LLT<Eigen::MatrixXd> llt(qff);
  if (llt.info() != Eigen::Success) throw NumericalError("oracle: precision is not positive definite");
  GaussianMoments out;
  out.mean = llt.solve(rhs);
  out.cov = llt.solve(Eigen::MatrixXd::Identity(m, m));
  return out;
}

namespace {

struct Partition {
  Eigen::MatrixXd qhh, qht, qtt;
};

Partition partition(const LinearSde& sde, const Hierarchy& h, int level) {
  const Eigen::MatrixXd q = level_precision(sde, h, level);
  const Eigen::Index n = q.rows();
  const Eigen::Index nh = n / 2 + 1;
  const Eigen::Index nt = n / 2;
  Partition p{Eigen::MatrixXd(nh, nh), Eigen::MatrixXd(nh, nt), Eigen::MatrixXd(nt, nt)};
  for (Eigen::Index a = 0; a < nh; ++a) {
    for (Eigen::Index b = 0; b < nh; ++b) p.qhh(a, b) = q(2 * a, 2 * b);
    for (Eigen::Index b = 0; b < nt; ++b) p.qht(a, b) = q(2 * a, 2 * b + 1);
  }
  for (Eigen::Index a = 0; a < nt; ++a)
    for (Eigen::Index b = 0; b < nt; ++b) p.qtt(a, b) = q(2 * a + 1, 2 * b + 1);
  return p;
}

}  // namespace

double gaussian_marginal_log(const LinearSde& sde, const Hierarchy& h, int level, std::span<const double> hat) {
  const Partition p = partition(sde, h, level);
  if (static_cast<Eigen::Index>(hat.size()) != p.qhh.rows()) throw ArgumentError("oracle: hat size mismatch");
  const Eigen::MatrixXd schur = p.qhh - p.qht * p.qtt.llt().solve(p.qht.transpose());
  const Eigen::Map<const Eigen::VectorXd> x(hat.data(), static_cast<Eigen::Index>(hat.size()));
  return -0.5 * x.dot(schur * x);
}

double gaussian_marginal_log_ratio(const LinearSde& sde, const Hierarchy& h, int level,
                                   std::span<const double> hat_a, std::span<const double> hat_b) {
  return gaussian_marginal_log(sde, h, level, hat_a) - gaussian_marginal_log(sde, h, level, hat_b);
}

double telescoped_marginal_log_ratio(double sigma, const Hierarchy& h, int level,
                                     std::span<const double> hat_a, std::span<const double> hat_b) {
  const double coarse_step = 2.0 * h.step(level);
  auto coarse = [&](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
      const double d = x[k + 1] - x[k];
      s -= d * d / (2.0 * sigma * sigma * coarse_step);
    }
    return s;
  };
  return coarse(hat_a) - coarse(hat_b);
}

ExactLevelOracle gaussian_exact_oracle(const LinearSde& sde, const Hierarchy& h, int level) {
  struct State {
    Partition p;
    Eigen::MatrixXd schur;
    Eigen::LLT<Eigen::MatrixXd> tt;
  };
  auto st = std::make_shared<State>();
  st->p = partition(sde, h, level);
  st->tt.compute(st->p.qtt);
  st->schur = st->p.qhh - st->p.qht * st->tt.solve(st->p.qht.transpose());
  ExactLevelOracle o;
  o.log_marginal = [st](std::span<const double> hat) {
    const Eigen::Map<const Eigen::VectorXd> x(hat.data(), static_cast<Eigen::Index>(hat.size()));
    return -0.5 * x.dot(st->schur * x);
  };
  o.sample_conditional = [st](std::span<const double> hat, Rng& rng, std::span<double> out) {
    const Eigen::Map<const Eigen::VectorXd> x(hat.data(), static_cast<Eigen::Index>(hat.size()));
    const Eigen::VectorXd mean = -st->tt.solve(st->p.qht.transpose() * x);
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = rng.normal();
    const Eigen::VectorXd dev = st->tt.matrixU().solve(z);
    for (Eigen::Index k = 0; k < z.size(); ++k) out[static_cast<std::size_t>(k)] = mean(k) + dev(k);
  };
  return o;
}

}  // namespace pm::oracle
