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

#ifndef RICEMI_MC_HPP
#define RICEMI_MC_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "ricemi/linalg.hpp"
#include "ricemi/model.hpp"

namespace ricemi {

/// Seeded Monte-Carlo estimate in nats.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;  ///< sample standard deviation / sqrt(trials)
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Ergodic mutual information E[log det(I + H Q H^H / sigma^2)] estimated
/// over `trials` seeded channel draws. Per-trial determinants go through
/// Cholesky; accumulation is pairwise, so the estimate depends only on
/// (model, Q, trials, seed) and never on thread count.
///
/// Reusing the same seed across different Q gives common random numbers:
/// every trial sees the identical W draw, which is what the finite-difference
/// checks and the reference optimizer rely on for low-variance comparisons.
McEstimate mc_emi(const ChannelModel& model, const CovarianceMatrix& q,
                  std::int64_t trials, std::uint64_t seed);

/// Single-threaded reference implementation kept for testing; bit-identical
/// to mc_emi by construction.
McEstimate mc_emi_serial(const ChannelModel& model, const CovarianceMatrix& q,
                         std::int64_t trials, std::uint64_t seed);

/// Evaluates `fn(trial)` for trial = 0..trials-1 into a dense buffer.
/// The parallel flavor distributes trials across OpenMP threads; since each
/// slot is written exactly once, the buffer content is schedule-independent.
std::vector<double> map_trials(std::int64_t trials,
                               const std::function<double(std::int64_t)>& fn,
                               bool parallel);

/// Mean and standard error from per-trial values via pairwise summation.
/// Requires at least 2 values.
McEstimate estimate_from_values(std::vector<double> values, std::uint64_t seed);

}  // namespace ricemi

#endif  // RICEMI_MC_HPP
