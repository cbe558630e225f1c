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

#include "ricemi/mc.hpp"

#include <cmath>
#include <stdexcept>

#include "ricemi/errors.hpp"
#include "ricemi/rng.hpp"

namespace ricemi {

namespace {

// Draws W for (seed, trial) and returns the channel matrix, reusing
// precomputed correlation square roots. Must stay in lockstep with
// sample_channel so both produce the same H for the same coordinates.
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

McEstimate mc_emi_impl(const ChannelModel& model, const CovarianceMatrix& q,
                       std::int64_t trials, std::uint64_t seed, bool parallel) {
  model.validate();
  if (trials < 2) throw std::invalid_argument("Monte-Carlo estimation needs at least 2 trials");
  if (q.dim() != model.t) throw std::invalid_argument("covariance dimension mismatch");

  const MatrixC rx_sqrt = psd_sqrt(model.rx_corr);
  const MatrixC tx_sqrt = psd_sqrt(model.tx_corr);
  const double inv_sigma2 = 1.0 / model.sigma2;
  const MatrixC identity = MatrixC::Identity(model.r, model.r);

  auto per_trial = [&](std::int64_t trial) {
    const MatrixC h = draw_channel(model, rx_sqrt, tx_sqrt, seed, trial);
    const MatrixC hq = h * q.q;
    const MatrixC m = identity + inv_sigma2 * hermitize(hq * h.adjoint());
    return logdet_hpd(m);
  };

  return estimate_from_values(map_trials(trials, per_trial, parallel), seed);
}

}  // namespace

std::vector<double> map_trials(std::int64_t trials,
                               const std::function<double(std::int64_t)>& fn,
                               bool parallel) {
  std::vector<double> values(static_cast<std::size_t>(trials));
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < trials; ++i) {
      values[static_cast<std::size_t>(i)] = fn(i);
    }
  } else {
    for (std::int64_t i = 0; i < trials; ++i) {
      values[static_cast<std::size_t>(i)] = fn(i);
    }
  }
  return values;
}

McEstimate estimate_from_values(std::vector<double> values, std::uint64_t seed) {
  const std::int64_t n = static_cast<std::int64_t>(values.size());
  if (n < 2) throw std::invalid_argument("estimate needs at least 2 values");
  McEstimate est;
  est.trials = n;
  est.seed = seed;
  est.mean = pairwise_sum(values) / static_cast<double>(n);
  for (double& v : values) {
    const double d = v - est.mean;
    v = d * d;
  }
  const double ss = pairwise_sum(values);
  const double sample_var = ss / static_cast<double>(n - 1);
  est.std_error = std::sqrt(sample_var / static_cast<double>(n));
  return est;
}

McEstimate mc_emi(const ChannelModel& model, const CovarianceMatrix& q,
                  std::int64_t trials, std::uint64_t seed) {
  return mc_emi_impl(model, q, trials, seed, /*parallel=*/true);
}

McEstimate mc_emi_serial(const ChannelModel& model, const CovarianceMatrix& q,
                         std::int64_t trials, std::uint64_t seed) {
  return mc_emi_impl(model, q, trials, seed, /*parallel=*/false);
}

}  // namespace ricemi
