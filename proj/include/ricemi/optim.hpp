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

#ifndef RICEMI_OPTIM_HPP
#define RICEMI_OPTIM_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "ricemi/linalg.hpp"
#include "ricemi/model.hpp"
#include "ricemi/rician.hpp"

namespace ricemi {

/// Effective transmit-side channel matrix
///
///   G(kappa, kappa~) = kappa/(K+1) C~
///                    + K/(sigma2 (K+1)) A^H (I_r + kappa~/(K+1) C)^{-1} A,
///
/// Hermitian PSD; the waterfilling objective at frozen (kappa, kappa~) is
/// log det(I + Q G).
MatrixC effective_channel_matrix(const ChannelModel& model, double kappa,
                                 double kappa_tilde);

/// Frozen multiplier pair plus its effective channel matrix.
struct VContext {
  double kappa = 0.0;
  double kappa_tilde = 0.0;
  MatrixC g;

  static VContext make(const ChannelModel& model, double kappa, double kappa_tilde);
};

/// Result of exact waterfilling over the trace-normalized PSD cone.
struct WaterfillResult {
  CovarianceMatrix q;
  double water_level = 0.0;  ///< gamma; NaN when the objective is degenerate
  VectorR q_eigenvalues;     ///< allocated powers, aligned with g_eigenvalues
  VectorR g_eigenvalues;     ///< spectrum of G (ascending)
  MatrixC basis;             ///< shared eigenvectors of G and Q
  bool degenerate = false;   ///< G = 0: any Q is optimal, identity returned
};

/// Maximizes log det(I + Q G) over { Q >= 0, (1/t) tr Q = 1 }. The optimal Q
/// shares G's eigenvectors with powers lambda_j = max(gamma - 1/g_j, 0); the
/// water level gamma comes from an exact sorted-breakpoint scan, so the trace
/// constraint holds to machine precision and no iteration is involved.
/// Zero eigenvalues of G receive zero power. A (numerically) zero G has a
/// constant objective; the identity is returned and flagged.
WaterfillResult waterfill_detailed(const MatrixC& g, double tol = 1e-13);
CovarianceMatrix waterfill(const MatrixC& g, double tol = 1e-13);

/// The variational objective
///
///   V(kappa, kappa~, Q) = log det(I + Q G(kappa, kappa~))
///                       + log det(I_r + kappa~/(K+1) C)
///                       - t sigma2 kappa kappa~ / (K+1)   (nats),
///
/// which equals the EMI approximation when (kappa, kappa~) solve the coupled
/// system at Q, and whose partial derivatives in (kappa, kappa~) vanish
/// exactly there. Requires kappa, kappa~ > 0.
double v_function(const ChannelModel& model, double kappa, double kappa_tilde,
                  const CovarianceMatrix& q);

enum class StopReason { tolerance_met, max_iter, delta_condition_violated };

struct IterationRecord {
  int k = 0;
  double delta = 0.0;        ///< multiplier solved on the previous covariance
  double delta_tilde = 0.0;
  MatrixC q;                 ///< covariance after this step
  double i_bar = 0.0;        ///< EMI approximation at q, nats
  double d_delta = 0.0;      ///< |delta_k - delta_{k-1}|; 0 at k = 1, NaN at k = 0
  double d_delta_tilde = 0.0;
  double dq_frobenius = 0.0; ///< ||Q_k - Q_{k-1}||_F / sqrt(t); NaN at k = 0
};

struct OptimizationTrace {
  std::vector<IterationRecord> iterations;
  bool converged = false;
  StopReason stop_reason = StopReason::max_iter;
  double final_lambda_min_g = 0.0;  ///< smallest eigenvalue of G at the solution
  double final_q_norm = 0.0;        ///< ||Q*||, checked against 1 + 1/lambda_min(G*)
};

/// Alternating maximization: starting from Q_0 = I, each step solves the
/// coupled system at the current covariance and then waterfills the frozen
/// objective. Stops when max(|d delta|, |d delta~|, ||dQ||_F / sqrt(t))
/// drops below `tol`, recording per-iteration deltas so the vanishing-
/// increment convergence condition can be verified from the trace.
/// After every run the norm bound ||Q*|| <= 1 + 1/lambda_min(G*) is checked.
std::pair<CovarianceMatrix, OptimizationTrace> optimize_covariance(
    const ChannelModel& model, double tol = 1e-9, int max_iter = 100);

/// Monte-Carlo gradient of Q -> E log det(I + H Q H^H / sigma2):
/// the sample mean of H^H (I + H Q H^H / sigma2)^{-1} H / sigma2 over seeded
/// draws (common random numbers when the seed is reused). Deterministic for
/// fixed (model, Q, trials, seed) regardless of thread count.
MatrixC mc_emi_gradient(const ChannelModel& model, const CovarianceMatrix& q,
                        std::int64_t trials, std::uint64_t seed);

struct StepRule {
  double scale = 0.1;            ///< step = scale * t / ||grad||_F
  int patience = 5;              ///< objective drops tolerated before halving
  double min_scale_factor = 1e-6;///< hard failure below scale * this
};

struct McOptimizerDiagnostics {
  int iterations = 0;
  double best_value = 0.0;      ///< best Monte-Carlo objective seen, nats
  double best_std_error = 0.0;
  double final_scale = 0.0;
  std::vector<double> objective_history;
  double avg_step_ms = 0.0;     ///< average wall time per ascent step
};

/// Reference optimizer: projected stochastic gradient ascent on the
/// Monte-Carlo EMI with common random numbers, projection onto the
/// constraint set by eigenvalue clipping plus trace renormalization.
/// Returns the best iterate. Exists as an independent check of the
/// deterministic-equivalent optimizer, not as a production path.
std::pair<CovarianceMatrix, McOptimizerDiagnostics> mc_reference_optimizer(
    const ChannelModel& model, std::int64_t trials, std::uint64_t seed,
    int max_iter, StepRule step_rule = {});

struct ConcavityReport {
  VectorR lambdas;             ///< grid on [0, 1]
  VectorR values;              ///< EMI approximation along the segment
  VectorR second_differences;
  int violations = 0;          ///< second differences above +1e-8
  double max_second_difference = 0.0;
  bool degenerate = false;     ///< endpoints coincide; probe is vacuous
};

/// Samples the EMI approximation along the segment between two covariance
/// matrices and reports all second differences; any positive one (beyond
/// +1e-8) contradicts strict concavity.
ConcavityReport concavity_probe(const ChannelModel& model, const CovarianceMatrix& q1,
                                const CovarianceMatrix& q2, int grid_points,
                                double tol = 1e-10, int max_iter = 10000);

}  // namespace ricemi

#endif  // RICEMI_OPTIM_HPP
