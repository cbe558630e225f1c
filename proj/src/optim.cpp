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

#include "ricemi/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ricemi/errors.hpp"
#include "ricemi/mc.hpp"
#include "ricemi/rng.hpp"

namespace ricemi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

MatrixC draw_channel(const ChannelModel& model, const MatrixC& rx_sqrt,
                     const MatrixC& tx_sqrt, std::uint64_t seed, std::int64_t trial) {
  RngStream rng(seed, static_cast<std::uint64_t>(trial));
  MatrixC w(model.r, model.t);
  for (int j = 0; j < model.t; ++j) {
    for (int i = 0; i < model.r; ++i) {
      w(i, j) = rng.gaussian_c();
    }
  }
  const double k = model.rician_k;
  const double scatter_scale = 1.0 / std::sqrt((k + 1.0) * model.t);
  if (k > 0.0) {
    return std::sqrt(k / (k + 1.0)) * model.los + scatter_scale * (rx_sqrt * w * tx_sqrt);
  }
  return scatter_scale * (rx_sqrt * w * tx_sqrt);
}

MatrixC pairwise_matrix_sum(std::vector<MatrixC>& blocks, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return blocks[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_matrix_sum(blocks, lo, mid) + pairwise_matrix_sum(blocks, mid, hi);
}

/// Euclidean projection onto { Q >= 0, tr Q = t }: eigendecompose, then
/// project the spectrum onto the scaled simplex (clip negatives, shift the
/// active set so the trace is restored exactly). A multiplicative trace
/// rescaling would have fixed points with grad proportional to Q instead of
/// the identity, i.e. the ascent would stall off the true optimum.
CovarianceMatrix project_to_constraint(const MatrixC& q_raw) {
  const int t = static_cast<int>(q_raw.rows());
  auto [values, basis] = eigh(hermitize(q_raw));
  std::vector<double> sorted(values.data(), values.data() + t);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double prefix = 0.0;
  double shift = 0.0;
  for (int m = 1; m <= t; ++m) {
    prefix += sorted[m - 1];
    const double candidate = (prefix - static_cast<double>(t)) / m;
    if (sorted[m - 1] - candidate > 0.0 && (m == t || sorted[m] - candidate <= 0.0)) {
      shift = candidate;
      break;
    }
  }
  VectorR projected = (values.array() - shift).cwiseMax(0.0);
  return CovarianceMatrix::make(hermitize(basis * projected.asDiagonal() * basis.adjoint()));
}

}  // namespace

MatrixC effective_channel_matrix(const ChannelModel& model, double kappa,
                                 double kappa_tilde) {
  const double kp1 = model.rician_k + 1.0;
  MatrixC g = (kappa / kp1) * model.tx_corr;
  if (model.rician_k > 0.0 && model.los.squaredNorm() > 0.0) {
    const MatrixC res = hermitize(MatrixC::Identity(model.r, model.r) +
                                  (kappa_tilde / kp1) * model.rx_corr);
    const MatrixC solved = Eigen::LLT<MatrixC>(res).solve(model.los);
    g += (model.rician_k / (model.sigma2 * kp1)) * hermitize(model.los.adjoint() * solved);
  }
  return hermitize(g);
}

VContext VContext::make(const ChannelModel& model, double kappa, double kappa_tilde) {
  if (!(kappa > 0.0) || !(kappa_tilde > 0.0)) {
    throw std::invalid_argument("multipliers must be positive");
  }
  return VContext{kappa, kappa_tilde, effective_channel_matrix(model, kappa, kappa_tilde)};
}

WaterfillResult waterfill_detailed(const MatrixC& g, double tol) {
  if (g.rows() != g.cols() || g.rows() < 1) throw std::invalid_argument("G must be square");
  const int t = static_cast<int>(g.rows());
  auto [g_values, basis] = eigh(hermitize(g));
  VectorR spectrum = g_values.cwiseMax(0.0);

  WaterfillResult out;
  out.g_eigenvalues = spectrum;
  out.basis = basis;
  if (spectrum.maxCoeff() <= tol) {
    out.q = CovarianceMatrix::identity(t);
    out.q_eigenvalues = VectorR::Ones(t);
    out.water_level = kNaN;
    out.degenerate = true;
    return out;
  }

  // Breakpoints 1/g sorted ascending; modes with g = 0 never activate.
  std::vector<int> order(t);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return spectrum[a] > spectrum[b]; });
  int active_max = 0;
  while (active_max < t && spectrum[order[active_max]] > 0.0) ++active_max;

  std::vector<double> breakpoints(active_max);
  for (int i = 0; i < active_max; ++i) breakpoints[i] = 1.0 / spectrum[order[i]];

  // Exact water level: with m active modes, gamma = (t + sum_{j<=m} 1/g_j)/m;
  // the unique consistent m satisfies b_m < gamma <= b_{m+1}.
  double gamma = 0.0;
  int active = 0;
  double prefix = 0.0;
  for (int m = 1; m <= active_max; ++m) {
    prefix += breakpoints[m - 1];
    const double candidate = (static_cast<double>(t) + prefix) / m;
    if (candidate > breakpoints[m - 1] &&
        (m == active_max || candidate <= breakpoints[m])) {
      gamma = candidate;
      active = m;
      break;
    }
  }
  if (active == 0) throw solver_error("waterfilling active-set scan found no consistent level");

  VectorR powers = VectorR::Zero(t);
  for (int i = 0; i < active; ++i) {
    powers[order[i]] = gamma - breakpoints[i];
  }
  out.q_eigenvalues = powers;
  out.water_level = gamma;
  out.q = CovarianceMatrix::make(hermitize(basis * powers.asDiagonal() * basis.adjoint()));
  return out;
}

CovarianceMatrix waterfill(const MatrixC& g, double tol) {
  return waterfill_detailed(g, tol).q;
}

double v_function(const ChannelModel& model, double kappa, double kappa_tilde,
                  const CovarianceMatrix& q) {
  if (!(kappa > 0.0) || !(kappa_tilde > 0.0)) {
    throw std::invalid_argument("multipliers must be positive");
  }
  const double kp1 = model.rician_k + 1.0;
  const MatrixC g = effective_channel_matrix(model, kappa, kappa_tilde);
  const MatrixC q_sqrt = psd_sqrt(q.q);
  const int t = model.t;
  const double logdet_q = logdet_hpd(hermitize(MatrixC::Identity(t, t) + q_sqrt * g * q_sqrt));
  const double logdet_r = logdet_hpd(hermitize(MatrixC::Identity(model.r, model.r) +
                                               (kappa_tilde / kp1) * model.rx_corr));
  return logdet_q + logdet_r - t * model.sigma2 * kappa * kappa_tilde / kp1;
}

std::pair<CovarianceMatrix, OptimizationTrace> optimize_covariance(
    const ChannelModel& model, double tol, int max_iter) {
  model.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iter < 0) throw std::invalid_argument("iteration budget must be nonnegative");
  const int t = model.t;
  const double sqrt_t = std::sqrt(static_cast<double>(t));

  OptimizationTrace trace;
  CovarianceMatrix q_prev = CovarianceMatrix::identity(t);
  FixedPointSolution sol_prev;  // multipliers for q_prev
  try {
    sol_prev = solve_delta_system(model, q_prev);
  } catch (const solver_error& e) {
    throw solver_error(std::string("initialization: ") + e.what());
  }

  IterationRecord init;
  init.k = 0;
  init.delta = sol_prev.delta;
  init.delta_tilde = sol_prev.delta_tilde;
  init.q = q_prev.q;
  init.i_bar = emi_approx(model, q_prev, sol_prev).value;
  init.d_delta = kNaN;
  init.d_delta_tilde = kNaN;
  init.dq_frobenius = kNaN;
  trace.iterations.push_back(init);

  trace.converged = false;
  trace.stop_reason = StopReason::max_iter;

  for (int k = 1; k <= max_iter; ++k) {
    const double delta_k = sol_prev.delta;
    const double delta_tilde_k = sol_prev.delta_tilde;
    const MatrixC g = effective_channel_matrix(model, delta_k, delta_tilde_k);
    CovarianceMatrix q_k = waterfill(g);

    FixedPointSolution sol_k;
    try {
      sol_k = solve_delta_system(model, q_k);
    } catch (const solver_error& e) {
      throw solver_error("iteration " + std::to_string(k) + ": " + e.what());
    }

    IterationRecord rec;
    rec.k = k;
    rec.delta = delta_k;
    rec.delta_tilde = delta_tilde_k;
    rec.q = q_k.q;
    rec.i_bar = emi_approx(model, q_k, sol_k).value;
    rec.dq_frobenius = (q_k.q - q_prev.q).norm() / sqrt_t;
    if (k >= 2) {
      rec.d_delta = std::abs(delta_k - trace.iterations[k - 1].delta);
      rec.d_delta_tilde = std::abs(delta_tilde_k - trace.iterations[k - 1].delta_tilde);
    } else {
      // The first step has no predecessor pair to difference against.
      rec.d_delta = 0.0;
      rec.d_delta_tilde = 0.0;
    }
    trace.iterations.push_back(rec);

    const double delta_step = k >= 2 ? std::max(rec.d_delta, rec.d_delta_tilde) : 0.0;
    q_prev = q_k;
    sol_prev = sol_k;
    if (std::max(delta_step, rec.dq_frobenius) <= tol) {
      trace.converged = true;
      trace.stop_reason = StopReason::tolerance_met;
      break;
    }
  }

  if (!trace.converged && max_iter > 0) {
    // The convergence guarantee hinges on the multiplier increments dying
    // out; if they show no decay over the tail of the run, report that
    // condition explicitly instead of a generic budget exhaustion.
    const auto& recs = trace.iterations;
    const std::size_t n = recs.size();
    if (n >= 6) {  // compare genuine increments only (k >= 2)
      const double last = std::max(recs[n - 1].d_delta, recs[n - 1].d_delta_tilde);
      const double earlier = std::max(recs[n - 4].d_delta, recs[n - 4].d_delta_tilde);
      if (std::isfinite(last) && std::isfinite(earlier) && earlier > 0.0 && last >= earlier) {
        trace.stop_reason = StopReason::delta_condition_violated;
      }
    }
  }

  const MatrixC g_final =
      effective_channel_matrix(model, sol_prev.delta, sol_prev.delta_tilde);
  auto [g_vals, g_basis] = eigh(g_final);
  trace.final_lambda_min_g = g_vals.minCoeff();
  trace.final_q_norm = spectral_norm_hermitian(q_prev.q);
  if (trace.final_lambda_min_g > 0.0) {
    const double bound = 1.0 + 1.0 / trace.final_lambda_min_g;
    if (trace.final_q_norm > bound * (1.0 + 1e-9)) {
      throw numerical_error("optimizer norm bound violated: ||Q|| = " +
                            std::to_string(trace.final_q_norm) + " > " +
                            std::to_string(bound));
    }
  }
  return {q_prev, trace};
}

MatrixC mc_emi_gradient(const ChannelModel& model, const CovarianceMatrix& q,
                        std::int64_t trials, std::uint64_t seed) {
  model.validate();
  if (trials < 1) throw std::invalid_argument("gradient estimation needs at least 1 trial");
  if (q.dim() != model.t) throw std::invalid_argument("covariance dimension mismatch");

  const MatrixC rx_sqrt = psd_sqrt(model.rx_corr);
  const MatrixC tx_sqrt = psd_sqrt(model.tx_corr);
  const double inv_sigma2 = 1.0 / model.sigma2;
  const MatrixC identity = MatrixC::Identity(model.r, model.r);

  // Fixed-size trial blocks, each summed in trial order; the block layout is
  // independent of threading, so the reduction is reproducible.
  constexpr std::int64_t kBlock = 256;
  const std::int64_t n_blocks = (trials + kBlock - 1) / kBlock;
  std::vector<MatrixC> block_sums(static_cast<std::size_t>(n_blocks));

#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < n_blocks; ++b) {
    MatrixC acc = MatrixC::Zero(model.t, model.t);
    const std::int64_t lo = b * kBlock;
    const std::int64_t hi = std::min(trials, lo + kBlock);
    for (std::int64_t trial = lo; trial < hi; ++trial) {
      const MatrixC h = draw_channel(model, rx_sqrt, tx_sqrt, seed, trial);
      const MatrixC m = identity + inv_sigma2 * hermitize(h * q.q * h.adjoint());
      const MatrixC solved = Eigen::LLT<MatrixC>(m).solve(h);
      acc += h.adjoint() * solved;
    }
    block_sums[static_cast<std::size_t>(b)] = acc;
  }

  MatrixC total = pairwise_matrix_sum(block_sums, 0, block_sums.size());
  return hermitize(total * (inv_sigma2 / static_cast<double>(trials)));
}

std::pair<CovarianceMatrix, McOptimizerDiagnostics> mc_reference_optimizer(
    const ChannelModel& model, std::int64_t trials, std::uint64_t seed,
    int max_iter, StepRule step_rule) {
  model.validate();
  if (max_iter < 1) throw std::invalid_argument("iteration budget must be positive");
  using clock = std::chrono::steady_clock;

  const int t = model.t;
  CovarianceMatrix q = CovarianceMatrix::identity(t);
  McEstimate current = mc_emi(model, q, trials, seed);

  CovarianceMatrix best_q = q;
  McEstimate best = current;
  McOptimizerDiagnostics diag;
  diag.objective_history.push_back(current.mean);

  double scale = step_rule.scale;
  const double scale_floor = step_rule.scale * step_rule.min_scale_factor;
  int stale_steps = 0;  // steps since the best objective last improved
  double total_ms = 0.0;

  for (int it = 1; it <= max_iter; ++it) {
    const auto t0 = clock::now();
    const MatrixC grad = mc_emi_gradient(model, q, trials, seed);
    const double grad_norm = grad.norm();
    if (!(grad_norm > 0.0) || !std::isfinite(grad_norm)) {
      throw numerical_error("gradient estimate is degenerate");
    }
    const double step = scale * static_cast<double>(t) / grad_norm;
    q = project_to_constraint(q.q + step * grad);
    current = mc_emi(model, q, trials, seed);
    total_ms += std::chrono::duration<double, std::milli>(clock::now() - t0).count();

    diag.objective_history.push_back(current.mean);
    diag.iterations = it;

    if (current.mean > best.mean) {
      best = current;
      best_q = q;
      stale_steps = 0;
    } else {
      // A fixed step orbits the constrained optimum without ever producing a
      // long run of strict drops, so staleness, not consecutive drops, is the
      // halving trigger.
      ++stale_steps;
      if (stale_steps > step_rule.patience) {
        scale *= 0.5;
        stale_steps = 0;
        q = best_q;  // restart from the best point with the smaller step
        if (scale < scale_floor) {
          throw solver_error("reference optimizer step size collapsed below floor");
        }
      }
    }
  }

  diag.best_value = best.mean;
  diag.best_std_error = best.std_error;
  diag.final_scale = scale;
  diag.avg_step_ms = total_ms / std::max(1, diag.iterations);
  return {best_q, diag};
}

ConcavityReport concavity_probe(const ChannelModel& model, const CovarianceMatrix& q1,
                                const CovarianceMatrix& q2, int grid_points,
                                double tol, int max_iter) {
  if (grid_points < 3) throw std::invalid_argument("need at least 3 grid points");
  if (q1.dim() != model.t || q2.dim() != model.t) {
    throw std::invalid_argument("covariance dimension mismatch");
  }

  ConcavityReport report;
  report.degenerate = (q1.q - q2.q).norm() <= 1e-14 * std::sqrt(static_cast<double>(model.t));
  report.lambdas = VectorR::LinSpaced(grid_points, 0.0, 1.0);
  report.values = VectorR(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    const double lam = report.lambdas[i];
    const CovarianceMatrix mix =
        CovarianceMatrix::make(lam * q1.q + (1.0 - lam) * q2.q);
    report.values[i] = emi_approx(model, mix, tol, max_iter).value;
  }
  report.second_differences = VectorR(grid_points - 2);
  report.max_second_difference = -std::numeric_limits<double>::infinity();
  for (int i = 1; i + 1 < grid_points; ++i) {
    const double d2 = report.values[i + 1] - 2.0 * report.values[i] + report.values[i - 1];
    report.second_differences[i - 1] = d2;
    report.max_second_difference = std::max(report.max_second_difference, d2);
    if (d2 > 1e-8) ++report.violations;
  }
  return report;
}

}  // namespace ricemi
