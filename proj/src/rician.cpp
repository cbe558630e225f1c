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

#include "ricemi/rician.hpp"

#include <cmath>
#include <stdexcept>

#include "ricemi/errors.hpp"

namespace ricemi {

namespace {

constexpr double kDamping = 0.5;

double rel_gap(double x, double fx) {
  const double scale = std::max({std::abs(x), std::abs(fx), 1e-100});
  return std::abs(x - fx) / scale;
}

/// Both Rician trace maps with Q factored out of the inner inverses:
///
///   f  = (1/t) tr{ C [ s2 (I_r + dt/(K+1) C)
///                      + K/(K+1) (A Q) (I_t + d/(K+1) C~ Q)^{-1} A^H ]^{-1} }
///   f~ = (1/(s2 t)) tr{ (C~ Q) (I_t + G(d, dt) Q)^{-1} }
///
/// with G(k, kt) = k/(K+1) C~ + K/(s2 (K+1)) A^H (I_r + kt/(K+1) C)^{-1} A.
/// Only well-conditioned inverses of I + (...) appear, so singular Q from
/// waterfilling needs no special casing.
class DeltaMaps {
 public:
  DeltaMaps(const ChannelModel& model, const CovarianceMatrix& q)
      : model_(model),
        q_(q.q),
        aq_(model.los * q.q),
        ctq_(model.tx_corr * q.q),
        has_los_(model.rician_k > 0.0 && model.los.squaredNorm() > 0.0) {}

  double f_delta(double delta, double delta_tilde) const {
    Eigen::LLT<MatrixC> llt(outer_r(delta, delta_tilde));
    if (llt.info() != Eigen::Success) throw numerical_error("trace map: factorization failed");
    return llt.solve(model_.rx_corr).trace().real() / model_.t;
  }

  double f_delta_tilde(double delta, double delta_tilde) const {
    const int t = model_.t;
    const MatrixC x = MatrixC::Identity(t, t) + g_matrix(delta, delta_tilde) * q_;
    Eigen::PartialPivLU<MatrixC> lu(x);
    const double trace = lu.solve(ctq_).trace().real();
    return trace / (model_.sigma2 * t);
  }

  // s2 (I_r + dt/(K+1) C) + K/(K+1) A Q (I_t + d/(K+1) C~ Q)^{-1} A^H
  MatrixC outer_r(double delta, double delta_tilde) const {
    const double kp1 = model_.rician_k + 1.0;
    MatrixC u = model_.sigma2 *
                (MatrixC::Identity(model_.r, model_.r) + (delta_tilde / kp1) * model_.rx_corr);
    if (has_los_) {
      const MatrixC x =
          MatrixC::Identity(model_.t, model_.t) + (delta / kp1) * ctq_;
      const MatrixC solved = Eigen::PartialPivLU<MatrixC>(x).solve(model_.los.adjoint());
      u += (model_.rician_k / kp1) * hermitize(aq_ * solved);
    }
    return hermitize(u);
  }

  MatrixC g_matrix(double kappa, double kappa_tilde) const {
    const double kp1 = model_.rician_k + 1.0;
    MatrixC g = (kappa / kp1) * model_.tx_corr;
    if (has_los_) {
      const MatrixC res =
          MatrixC::Identity(model_.r, model_.r) + (kappa_tilde / kp1) * model_.rx_corr;
      const MatrixC solved = Eigen::LLT<MatrixC>(hermitize(res)).solve(model_.los);
      g += (model_.rician_k / (model_.sigma2 * kp1)) * hermitize(model_.los.adjoint() * solved);
    }
    return hermitize(g);
  }

  // s2 (I_t + Q^{1/2} G Q^{1/2}); needs the PSD square root of Q.
  MatrixC outer_t(double delta, double delta_tilde, const MatrixC& q_sqrt) const {
    const int t = model_.t;
    return hermitize(model_.sigma2 *
                     (MatrixC::Identity(t, t) +
                      q_sqrt * g_matrix(delta, delta_tilde) * q_sqrt));
  }

 private:
  const ChannelModel& model_;
  const MatrixC& q_;
  MatrixC aq_;
  MatrixC ctq_;
  bool has_los_;
};

FixedPointSolution finish_solution(const ChannelModel& model, const CovarianceMatrix& q,
                                   const DeltaMaps& maps, double delta, double delta_tilde,
                                   int iterations, SolveMethod method, double tol) {
  FixedPointSolution sol;
  sol.delta = delta;
  sol.delta_tilde = delta_tilde;
  sol.iterations = iterations;
  sol.method = method;
  sol.residual = std::max(rel_gap(delta, maps.f_delta(delta, delta_tilde)),
                          rel_gap(delta_tilde, maps.f_delta_tilde(delta, delta_tilde)));
  if (!std::isfinite(sol.residual) || sol.residual > tol) {
    throw solver_error("fixed-point residual above tolerance: " + std::to_string(sol.residual));
  }

  Eigen::LLT<MatrixC> llt_r(maps.outer_r(delta, delta_tilde));
  const MatrixC q_sqrt = psd_sqrt(q.q);
  Eigen::LLT<MatrixC> llt_t(maps.outer_t(delta, delta_tilde, q_sqrt));
  if (llt_r.info() != Eigen::Success || llt_t.info() != Eigen::Success) {
    throw numerical_error("resolvent-equivalent matrices are not positive definite");
  }
  sol.t_k = hermitize(llt_r.solve(MatrixC::Identity(model.r, model.r)));
  sol.t_k_tilde = hermitize(llt_t.solve(MatrixC::Identity(model.t, model.t)));
  return sol;
}

}  // namespace

FixedPointSolution solve_delta_system(const ChannelModel& model, const CovarianceMatrix& q,
                                      double tol, int max_iter) {
  model.validate();
  if (q.dim() != model.t) throw std::invalid_argument("covariance dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iter < 1) throw std::invalid_argument("iteration budget must be positive");

  DeltaMaps maps(model, q);
  double delta = 1.0 / model.sigma2;
  double delta_tilde = 1.0 / model.sigma2;
  for (int it = 1; it <= max_iter; ++it) {
    const double fd = maps.f_delta(delta, delta_tilde);
    const double fdt = maps.f_delta_tilde(delta, delta_tilde);
    if (!std::isfinite(fd) || !std::isfinite(fdt)) {
      throw numerical_error("fixed-point iteration produced non-finite values");
    }
    if (std::max(rel_gap(delta, fd), rel_gap(delta_tilde, fdt)) <= tol) {
      return finish_solution(model, q, maps, delta, delta_tilde, it, SolveMethod::picard, tol);
    }
    delta = (1.0 - kDamping) * delta + kDamping * fd;
    delta_tilde = (1.0 - kDamping) * delta_tilde + kDamping * fdt;
  }

  // Guaranteed fallback: the reduced separable model solves the same system
  // up to a sqrt(K+1) rescaling of both unknowns.
  const GenericEquivModel reduced = virtual_channel_reduce(model, q);
  const BetaSolution beta = solve_beta_system_nested(reduced, tol);
  const double scale = std::sqrt(model.rician_k + 1.0);
  return finish_solution(model, q, maps, scale * beta.beta, scale * beta.beta_tilde,
                         beta.iterations, SolveMethod::nested_bisection, tol);
}

EmiApproximation emi_approx(const ChannelModel& model, const CovarianceMatrix& q,
                            const FixedPointSolution& sol) {
  model.validate();
  const int t = model.t;
  const double kp1 = model.rician_k + 1.0;
  const double delta = sol.delta;
  const double delta_tilde = sol.delta_tilde;
  const bool has_los = model.rician_k > 0.0 && model.los.squaredNorm() > 0.0;

  const MatrixC q_sqrt = psd_sqrt(q.q);
  const MatrixC res_r = hermitize(MatrixC::Identity(model.r, model.r) +
                                  (delta_tilde / kp1) * model.rx_corr);
  const MatrixC sct = hermitize(q_sqrt * model.tx_corr * q_sqrt);  // Q^{1/2} C~ Q^{1/2}

  // Primary form: log det(I_t + Q^{1/2} G Q^{1/2}) + log det(I_r + dt/(K+1) C)
  //               - t s2 d dt / (K+1).
  MatrixC g = (delta / kp1) * model.tx_corr;
  if (has_los) {
    const MatrixC solved = Eigen::LLT<MatrixC>(res_r).solve(model.los);
    g += (model.rician_k / (model.sigma2 * kp1)) * hermitize(model.los.adjoint() * solved);
  }
  const double coupling = t * model.sigma2 * delta * delta_tilde / kp1;
  const double value =
      logdet_hpd(hermitize(MatrixC::Identity(t, t) + q_sqrt * hermitize(g) * q_sqrt)) +
      logdet_hpd(res_r) - coupling;

  // Alternative form, swapping which side carries the LOS quadratic term.
  const MatrixC m_t = hermitize(MatrixC::Identity(t, t) + (delta / kp1) * sct);
  MatrixC m_r = res_r;
  if (has_los) {
    const MatrixC as = model.los * q_sqrt;
    const MatrixC solved = Eigen::LLT<MatrixC>(m_t).solve(as.adjoint());
    m_r += (model.rician_k / (model.sigma2 * kp1)) * hermitize(as * solved);
  }
  const double alt_value = logdet_hpd(hermitize(m_r)) + logdet_hpd(m_t) - coupling;

  EmiApproximation out;
  out.value = value;
  out.alt_value = alt_value;
  out.delta = delta;
  out.delta_tilde = delta_tilde;
  out.form_gap = std::abs(value - alt_value);
  if (!(out.form_gap <= 1e-9 * std::max(1.0, std::abs(value)))) {
    throw numerical_error("closed-form expressions disagree: gap = " +
                          std::to_string(out.form_gap));
  }
  return out;
}

EmiApproximation emi_approx(const ChannelModel& model, const CovarianceMatrix& q,
                            double tol, int max_iter) {
  return emi_approx(model, q, solve_delta_system(model, q, tol, max_iter));
}

GenericEquivModel virtual_channel_reduce(const ChannelModel& model,
                                         const CovarianceMatrix& q) {
  model.validate();
  if (q.dim() != model.t) throw std::invalid_argument("covariance dimension mismatch");
  const double scale = 1.0 / std::sqrt(model.rician_k + 1.0);

  auto [d, u] = eigh(hermitize(scale * model.rx_corr));
  const MatrixC q_sqrt = psd_sqrt(q.q);
  auto [d_tilde, u_tilde] = eigh(hermitize(scale * (q_sqrt * model.tx_corr * q_sqrt)));
  // Rounding can leave eigenvalues a hair below zero; the profile is a
  // variance and must stay nonnegative.
  VectorR d_clamped = d.cwiseMax(0.0);
  VectorR dt_clamped = d_tilde.cwiseMax(0.0);

  MatrixC b;
  if (model.rician_k > 0.0) {
    b = std::sqrt(model.rician_k / (model.rician_k + 1.0)) *
        (u.adjoint() * model.los * q_sqrt * u_tilde);
  } else {
    b = MatrixC::Zero(model.r, model.t);
  }
  return GenericEquivModel::make(std::move(b), std::move(d_clamped), std::move(dt_clamped),
                                 model.sigma2);
}

std::pair<double, double> deltas_of(const ChannelModel& model, const CovarianceMatrix& q,
                                    double tol, int max_iter) {
  const FixedPointSolution sol = solve_delta_system(model, q, tol, max_iter);
  return {sol.delta, sol.delta_tilde};
}

std::pair<double, double> delta_maps(const ChannelModel& model, const CovarianceMatrix& q,
                                     double kappa, double kappa_tilde) {
  model.validate();
  if (q.dim() != model.t) throw std::invalid_argument("covariance dimension mismatch");
  DeltaMaps maps(model, q);
  return {maps.f_delta(kappa, kappa_tilde), maps.f_delta_tilde(kappa, kappa_tilde)};
}

}  // namespace ricemi
