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

#ifndef RICEMI_RICIAN_HPP
#define RICEMI_RICIAN_HPP

#include <utility>

#include "ricemi/detequiv.hpp"
#include "ricemi/linalg.hpp"
#include "ricemi/model.hpp"

namespace ricemi {

/// Positive solution (delta, delta~) of the Rician coupled system for a
/// given transmit covariance, together with the deterministic resolvent
/// equivalents
///
///   T_K  = [ s2 (I_r + dt/(K+1) C) + K/(K+1) A Q (I_t + d/(K+1) C~ Q)^{-1} A^H ]^{-1}
///   T~_K = [ s2 (I_t + d/(K+1) Q^{1/2} C~ Q^{1/2})
///            + K/(K+1) Q^{1/2} A^H (I_r + dt/(K+1) C)^{-1} A Q^{1/2} ]^{-1}
///
/// satisfying the trace identities delta = (1/t) tr(C T_K) and
/// delta~ = (1/t) tr(Q^{1/2} C~ Q^{1/2} T~_K).
struct FixedPointSolution {
  double delta = 0.0;
  double delta_tilde = 0.0;
  MatrixC t_k;        ///< r x r Hermitian
  MatrixC t_k_tilde;  ///< t x t Hermitian
  double residual = 0.0;
  int iterations = 0;
  SolveMethod method = SolveMethod::picard;
};

/// Solves the Rician system. The maps are evaluated in a form where Q only
/// ever appears as C~ Q or A Q, never through an inverse of Q^{1/2}, so
/// waterfilled covariances with zero eigenvalues are handled exactly.
/// Primary path: damped fixed-point iteration. Fallback: reduce to the
/// equivalent bias-plus-independent-entries model (see
/// virtual_channel_reduce) and run the guaranteed nested bisection there;
/// the two parameterizations are related by a fixed sqrt(K+1) scaling.
FixedPointSolution solve_delta_system(const ChannelModel& model, const CovarianceMatrix& q,
                                      double tol = 1e-10, int max_iter = 10000);

/// Large-system approximation of the ergodic mutual information at Q,
/// evaluated through both closed forms; their gap is part of the contract.
struct EmiApproximation {
  double value = 0.0;      ///< primary closed form, nats
  double delta = 0.0;
  double delta_tilde = 0.0;
  double alt_value = 0.0;  ///< alternative closed form, nats
  double form_gap = 0.0;   ///< |value - alt_value|, must stay <= 1e-9 max(1,|value|)
};

EmiApproximation emi_approx(const ChannelModel& model, const CovarianceMatrix& q,
                            const FixedPointSolution& sol);

/// Convenience: solve + evaluate in one call.
EmiApproximation emi_approx(const ChannelModel& model, const CovarianceMatrix& q,
                            double tol = 1e-10, int max_iter = 10000);

/// Unitary reduction of the virtual channel H Q^{1/2} to the separable
/// generic model: with U diag(D) U^H = C/sqrt(K+1) and
/// U~ diag(D~) U~^H = Q^{1/2} C~ Q^{1/2}/sqrt(K+1), the reduced model is
/// B = sqrt(K/(K+1)) U^H A Q^{1/2} U~ with profile (D, D~) and the same
/// noise variance; its EMI matches the EMI of (model, Q) in distribution.
GenericEquivModel virtual_channel_reduce(const ChannelModel& model,
                                         const CovarianceMatrix& q);

/// delta and delta~ as functions of Q; thin wrapper used by the optimizer
/// and by differentiability probes.
std::pair<double, double> deltas_of(const ChannelModel& model, const CovarianceMatrix& q,
                                    double tol = 1e-10, int max_iter = 10000);

/// Values of the two coupled trace maps at an arbitrary point (kappa,
/// kappa~), not necessarily the solution. The partial derivatives of the
/// variational objective V are proportional to the gaps between these maps
/// and their arguments, which the derivative-identity checks exercise.
std::pair<double, double> delta_maps(const ChannelModel& model, const CovarianceMatrix& q,
                                     double kappa, double kappa_tilde);

}  // namespace ricemi

#endif  // RICEMI_RICIAN_HPP
