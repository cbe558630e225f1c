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

#ifndef RICEMI_DETEQUIV_HPP
#define RICEMI_DETEQUIV_HPP

#include <cstdint>
#include <utility>

#include "ricemi/linalg.hpp"
#include "ricemi/mc.hpp"

namespace ricemi {

/// Deterministic-plus-random model with a separable variance profile:
///
///   Sigma = B + (1/sqrt(t)) D^{1/2} X D~^{1/2},
///
/// where B is deterministic r x t, X has i.i.d. standard circular complex
/// Gaussian entries, and D, D~ are nonnegative diagonal (stored as vectors).
struct GenericEquivModel {
  MatrixC b;           ///< deterministic component, r x t
  VectorR d;           ///< diag of D, length r, entries >= 0
  VectorR d_tilde;     ///< diag of D~, length t, entries >= 0
  double sigma2 = 1.0; ///< noise variance

  static GenericEquivModel make(MatrixC b, VectorR d, VectorR d_tilde, double sigma2);
  void validate() const;

  int rows() const { return static_cast<int>(b.rows()); }
  int cols() const { return static_cast<int>(b.cols()); }
};

enum class SolveMethod { picard, nested_bisection };

/// Positive solution of the coupled trace equations
///
///   beta  = (1/t) tr[ D ( sigma2 (I_r + beta~ D) + B (I_t + beta D~)^{-1} B^H )^{-1} ]
///   beta~ = (1/t) tr[ D~ ( sigma2 (I_t + beta D~) + B^H (I_r + beta~ D)^{-1} B )^{-1} ]
///
/// together with the resolvent-equivalent matrices
///
///   T  = [ sigma2 (I_r + beta~ D) + B (I_t + beta D~)^{-1} B^H ]^{-1}
///   T~ = [ sigma2 (I_t + beta D~) + B^H (I_r + beta~ D)^{-1} B ]^{-1}
///
/// which satisfy beta = (1/t) tr(D T), beta~ = (1/t) tr(D~ T~) and the
/// operator-norm bounds ||T|| <= 1/sigma2, ||T~|| <= 1/sigma2.
struct BetaSolution {
  double beta = 0.0;
  double beta_tilde = 0.0;
  MatrixC t_mat;        ///< T, r x r Hermitian
  MatrixC t_tilde_mat;  ///< T~, t x t Hermitian
  double residual = 0.0;
  int iterations = 0;
  SolveMethod method = SolveMethod::picard;
};

/// Solves the coupled system. Primary path: damped fixed-point iteration
/// (x <- (1-a) x + a F(x), a = 0.5, initialized at 1/sigma2). If that fails
/// to reach `tol` within `max_iter` sweeps, falls back to the nested scalar
/// scheme: both one-dimensional maps are strictly monotone, so an inner
/// bisection (solving the first equation for beta at fixed beta~) nested in
/// an outer bisection (on beta~) always succeeds.
///
/// Throws numerical_error on non-finite intermediates and solver_error when
/// even the guaranteed fallback cannot bracket a root, which indicates an
/// invariant violation upstream.
BetaSolution solve_beta_system(const GenericEquivModel& m, double tol = 1e-10,
                               int max_iter = 10000);

/// Runs only the nested-bisection scheme; exposed so tests can probe that
/// both routes agree (uniqueness check).
BetaSolution solve_beta_system_nested(const GenericEquivModel& m, double tol = 1e-10);

/// Large-system approximation of the ergodic mutual information of Sigma:
///
///   Jbar = log det[ I_r + beta~ D + (1/sigma2) B (I_t + beta D~)^{-1} B^H ]
///        + log det[ I_t + beta D~ ] - sigma2 t beta beta~   (nats)
///
/// Also evaluated through the transposed-form expression; the two must agree
/// to 1e-9 relative or a numerical_error is raised.
double j_bar(const GenericEquivModel& m, const BetaSolution& sol);

/// Both closed forms (primary, alternative), for diagnostics and tests.
std::pair<double, double> j_bar_forms(const GenericEquivModel& m, const BetaSolution& sol);

/// Monte-Carlo estimate of E log det(I_r + Sigma Sigma^H / sigma2) over
/// i.i.d. draws of Sigma; the oracle the closed form is judged against.
McEstimate mc_emi_generic(const GenericEquivModel& m, std::int64_t trials,
                          std::uint64_t seed);

}  // namespace ricemi

#endif  // RICEMI_DETEQUIV_HPP
