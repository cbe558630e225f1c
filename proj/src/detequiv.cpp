// SPDX-License-Identifier: Apache-2.0
//
// ricemi - deterministic-equivalent mutual information and covariance
// optimization for correlated Rician MIMO channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "ricemi/detequiv.hpp"

#include <cmath>
#include <stdexcept>

#include "ricemi/errors.hpp"
#include "ricemi/rng.hpp"

namespace ricemi {

namespace {

constexpr double kDamping = 0.5;
constexpr double kBisectRelTol = 1e-15;
constexpr int kBisectMaxIter = 220;

double rel_gap(double x, double fx) {
  const double scale = std::max({std::abs(x), std::abs(fx), 1e-100});
  return std::abs(x - fx) / scale;
}

/// Evaluates the two trace maps of the coupled system. D and D~ are
/// diagonal, so the inner inverses reduce to entrywise scalings and only the
/// outer r x r / t x t matrices need a factorization.
class BetaMaps {
 public:
  explicit BetaMaps(const GenericEquivModel& m)
      : m_(m), has_b_(m.b.squaredNorm() > 0.0) {}

  // First map: (1/t) tr[ D ( sigma2 (I_r + bt D) + B (I_t + b D~)^{-1} B^H )^{-1} ].
  double f_beta(double beta, double beta_tilde) const {
    MatrixC u = outer_r(beta, beta_tilde);
    Eigen::LLT<MatrixC> llt(u);
    if (llt.info() != Eigen::Success) throw numerical_error("trace map: factorization failed");
    const MatrixC sol = llt.solve(MatrixC(m_.d.cast<Complex>().asDiagonal()));
    return sol.trace().real() / m_.cols();
  }

  // Second map: (1/t) tr[ D~ ( sigma2 (I_t + b D~) + B^H (I_r + bt D)^{-1} B )^{-1} ].
  double f_beta_tilde(double beta, double beta_tilde) const {
    MatrixC u = outer_t(beta, beta_tilde);
    Eigen::LLT<MatrixC> llt(u);
    if (llt.info() != Eigen::Success) throw numerical_error("trace map: factorization failed");
    const MatrixC sol = llt.solve(MatrixC(m_.d_tilde.cast<Complex>().asDiagonal()));
    return sol.trace().real() / m_.cols();
  }

  MatrixC outer_r(double beta, double beta_tilde) const {
    const int r = m_.rows();
    MatrixC u = MatrixC::Zero(r, r);
    u.diagonal() = (m_.sigma2 * (VectorR::Ones(r) + beta_tilde * m_.d)).cast<Complex>();
    if (has_b_) {
      const VectorR w = (VectorR::Ones(m_.cols()) + beta * m_.d_tilde).cwiseInverse();
      u += hermitize(m_.b * w.cast<Complex>().asDiagonal() * m_.b.adjoint());
    }
    return u;
  }

  MatrixC outer_t(double beta, double beta_tilde) const {
    const int t = m_.cols();
    MatrixC u = MatrixC::Zero(t, t);
    u.diagonal() = (m_.sigma2 * (VectorR::Ones(t) + beta * m_.d_tilde)).cast<Complex>();
    if (has_b_) {
      const VectorR w = (VectorR::Ones(m_.rows()) + beta_tilde * m_.d).cwiseInverse();
      u += hermitize(m_.b.adjoint() * w.cast<Complex>().asDiagonal() * m_.b);
    }
    return u;
  }

  bool has_b() const { return has_b_; }

 private:
  const GenericEquivModel& m_;
  bool has_b_;
};

BetaSolution finish_solution(const GenericEquivModel& m, const BetaMaps& maps,
                             double beta, double beta_tilde, int iterations,
                             SolveMethod method, double tol) {
  BetaSolution sol;
  sol.beta = beta;
  sol.beta_tilde = beta_tilde;
  sol.iterations = iterations;
  sol.method = method;
  sol.residual = std::max(rel_gap(beta, maps.f_beta(beta, beta_tilde)),
                          rel_gap(beta_tilde, maps.f_beta_tilde(beta, beta_tilde)));
  if (!std::isfinite(sol.residual) || sol.residual > tol) {
    throw solver_error("fixed-point residual above tolerance: " + std::to_string(sol.residual));
  }

  Eigen::LLT<MatrixC> llt_r(maps.outer_r(beta, beta_tilde));
  Eigen::LLT<MatrixC> llt_t(maps.outer_t(beta, beta_tilde));
  if (llt_r.info() != Eigen::Success || llt_t.info() != Eigen::Success) {
    throw numerical_error("resolvent-equivalent matrices are not positive definite");
  }
  sol.t_mat = hermitize(llt_r.solve(MatrixC::Identity(m.rows(), m.rows())));
  sol.t_tilde_mat = hermitize(llt_t.solve(MatrixC::Identity(m.cols(), m.cols())));

  const double bound = (1.0 / m.sigma2) * (1.0 + 1e-9) + 1e-15;
  if (spectral_norm_hermitian(sol.t_mat) > bound ||
      spectral_norm_hermitian(sol.t_tilde_mat) > bound) {
    throw numerical_error("resolvent-equivalent norm bound violated");
  }
  return sol;
}

// Solves f(x) = x for the constant-free one-dimensional cases where one of
// the diagonal profiles vanishes: the corresponding unknown is exactly zero
// and the other map no longer depends on its own argument.
bool degenerate_masses(const GenericEquivModel& m, const BetaMaps& maps, double tol,
                       BetaSolution* out) {
  const bool d_zero = m.d.sum() == 0.0;
  const bool dt_zero = m.d_tilde.sum() == 0.0;
  if (!d_zero && !dt_zero) return false;
  double beta = 0.0, beta_tilde = 0.0;
  if (d_zero && !dt_zero) {
    beta_tilde = maps.f_beta_tilde(0.0, 0.0);  // independent of beta_tilde since D = 0
  } else if (!d_zero && dt_zero) {
    beta = maps.f_beta(0.0, 0.0);  // independent of beta since D~ = 0
  }
  *out = finish_solution(m, maps, beta, beta_tilde, 0, SolveMethod::picard, tol);
  return true;
}

// Inner scalar solve: the first map is increasing and bounded in beta at
// fixed beta_tilde, so the fixed point lies in [F(0), sup F] and bisection
// on F(beta) - beta is bracketed from the start.
double inner_fixed_point(const GenericEquivModel& m, const BetaMaps& maps,
                         double beta_tilde) {
  double lo = maps.f_beta(0.0, beta_tilde);
  double hi = 0.0;  // sup over beta: drop the B term entirely
  for (int i = 0; i < m.rows(); ++i) {
    hi += m.d[i] / (m.sigma2 * (1.0 + m.d[i] * beta_tilde));
  }
  hi /= m.cols();
  hi = std::max(hi, lo) * (1.0 + 1e-12) + 1e-300;
  for (int it = 0; it < kBisectMaxIter && (hi - lo) > kBisectRelTol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (maps.f_beta(mid, beta_tilde) - mid >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

BetaSolution solve_nested(const GenericEquivModel& m, const BetaMaps& maps, double tol) {
  // Outer equation in beta_tilde; the composed map is strictly decreasing,
  // diverges at 0+ and vanishes at infinity, so a sign change always exists.
  auto outer_gap = [&](double beta_tilde) {
    const double beta = inner_fixed_point(m, maps, beta_tilde);
    return maps.f_beta_tilde(beta, beta_tilde) - beta_tilde;
  };

  double hi = (m.d_tilde.sum() / m.cols()) / m.sigma2 * (1.0 + 1e-12) + 1e-300;
  double lo = hi;
  int expansions = 0;
  while (outer_gap(lo) <= 0.0) {
    lo *= 0.25;
    if (++expansions > 2000 || lo < 1e-300) {
      throw solver_error("nested scheme failed to bracket the outer root");
    }
  }
  int iterations = expansions;
  for (int it = 0; it < kBisectMaxIter && (hi - lo) > kBisectRelTol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (outer_gap(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    ++iterations;
  }
  const double beta_tilde = 0.5 * (lo + hi);
  const double beta = inner_fixed_point(m, maps, beta_tilde);
  return finish_solution(m, maps, beta, beta_tilde, iterations,
                         SolveMethod::nested_bisection, tol);
}

}  // namespace

GenericEquivModel GenericEquivModel::make(MatrixC b, VectorR d, VectorR d_tilde,
                                          double sigma2) {
  GenericEquivModel m;
  m.b = std::move(b);
  m.d = std::move(d);
  m.d_tilde = std::move(d_tilde);
  m.sigma2 = sigma2;
  m.validate();
  return m;
}

void GenericEquivModel::validate() const {
  if (b.rows() < 1 || b.cols() < 1) throw std::invalid_argument("B must be nonempty");
  if (d.size() != b.rows()) throw std::invalid_argument("D length must match rows of B");
  if (d_tilde.size() != b.cols()) throw std::invalid_argument("D~ length must match cols of B");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("noise variance must be positive");
  }
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d[i] >= 0.0) || !std::isfinite(d[i]))
      throw std::invalid_argument("variance profile entries must be nonnegative");
  }
  for (Eigen::Index j = 0; j < d_tilde.size(); ++j) {
    if (!(d_tilde[j] >= 0.0) || !std::isfinite(d_tilde[j]))
      throw std::invalid_argument("variance profile entries must be nonnegative");
  }
}

BetaSolution solve_beta_system(const GenericEquivModel& m, double tol, int max_iter) {
  m.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iter < 1) throw std::invalid_argument("iteration budget must be positive");

  BetaMaps maps(m);
  BetaSolution sol;
  if (degenerate_masses(m, maps, tol, &sol)) return sol;

  double beta = 1.0 / m.sigma2;
  double beta_tilde = 1.0 / m.sigma2;
  for (int it = 1; it <= max_iter; ++it) {
    const double fb = maps.f_beta(beta, beta_tilde);
    const double fbt = maps.f_beta_tilde(beta, beta_tilde);
    if (!std::isfinite(fb) || !std::isfinite(fbt)) {
      throw numerical_error("fixed-point iteration produced non-finite values");
    }
    if (std::max(rel_gap(beta, fb), rel_gap(beta_tilde, fbt)) <= tol) {
      return finish_solution(m, maps, beta, beta_tilde, it, SolveMethod::picard, tol);
    }
    beta = (1.0 - kDamping) * beta + kDamping * fb;
    beta_tilde = (1.0 - kDamping) * beta_tilde + kDamping * fbt;
  }
  return solve_nested(m, maps, tol);
}

BetaSolution solve_beta_system_nested(const GenericEquivModel& m, double tol) {
  m.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  BetaMaps maps(m);
  BetaSolution sol;
  if (degenerate_masses(m, maps, tol, &sol)) return sol;
  return solve_nested(m, maps, tol);
}

std::pair<double, double> j_bar_forms(const GenericEquivModel& m, const BetaSolution& sol) {
  const int r = m.rows();
  const int t = m.cols();
  const double beta = sol.beta;
  const double beta_tilde = sol.beta_tilde;
  const bool has_b = m.b.squaredNorm() > 0.0;

  MatrixC m1 = MatrixC::Zero(r, r);
  m1.diagonal() = (VectorR::Ones(r) + beta_tilde * m.d).cast<Complex>();
  if (has_b) {
    const VectorR w = (VectorR::Ones(t) + beta * m.d_tilde).cwiseInverse();
    m1 += (1.0 / m.sigma2) * hermitize(m.b * w.cast<Complex>().asDiagonal() * m.b.adjoint());
  }
  double log_tilde = 0.0;
  for (int j = 0; j < t; ++j) log_tilde += std::log1p(beta * m.d_tilde[j]);
  const double coupling = m.sigma2 * t * beta * beta_tilde;
  const double primary = logdet_hpd(hermitize(m1)) + log_tilde - coupling;

  MatrixC m2 = MatrixC::Zero(t, t);
  m2.diagonal() = (VectorR::Ones(t) + beta * m.d_tilde).cast<Complex>();
  if (has_b) {
    const VectorR w = (VectorR::Ones(r) + beta_tilde * m.d).cwiseInverse();
    m2 += (1.0 / m.sigma2) * hermitize(m.b.adjoint() * w.cast<Complex>().asDiagonal() * m.b);
  }
  double log_plain = 0.0;
  for (int i = 0; i < r; ++i) log_plain += std::log1p(beta_tilde * m.d[i]);
  const double alternative = logdet_hpd(hermitize(m2)) + log_plain - coupling;

  return {primary, alternative};
}

double j_bar(const GenericEquivModel& m, const BetaSolution& sol) {
  const auto [primary, alternative] = j_bar_forms(m, sol);
  const double gap = std::abs(primary - alternative);
  if (!(gap <= 1e-9 * std::max(1.0, std::abs(primary)))) {
    throw numerical_error("closed-form expressions disagree: gap = " + std::to_string(gap));
  }
  return primary;
}

McEstimate mc_emi_generic(const GenericEquivModel& m, std::int64_t trials,
                          std::uint64_t seed) {
  m.validate();
  if (trials < 2) throw std::invalid_argument("Monte-Carlo estimation needs at least 2 trials");

  const int r = m.rows();
  const int t = m.cols();
  const double inv_sigma2 = 1.0 / m.sigma2;
  MatrixR entry_scale(r, t);
  for (int j = 0; j < t; ++j) {
    for (int i = 0; i < r; ++i) {
      entry_scale(i, j) = std::sqrt(m.d[i] * m.d_tilde[j] / t);
    }
  }
  const MatrixC identity = MatrixC::Identity(r, r);

  auto per_trial = [&](std::int64_t trial) {
    RngStream rng(seed, static_cast<std::uint64_t>(trial));
    MatrixC sigma = m.b;
    for (int j = 0; j < t; ++j) {
      for (int i = 0; i < r; ++i) {
        sigma(i, j) += entry_scale(i, j) * rng.gaussian_c();
      }
    }
    return logdet_hpd(identity + inv_sigma2 * hermitize(sigma * sigma.adjoint()));
  };

  return estimate_from_values(map_trials(trials, per_trial, /*parallel=*/true), seed);
}

}  // namespace ricemi
