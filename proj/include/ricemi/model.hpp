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

#ifndef RICEMI_MODEL_HPP
#define RICEMI_MODEL_HPP

#include <cstdint>
#include <vector>

#include "ricemi/linalg.hpp"
#include "ricemi/rng.hpp"

namespace ricemi {

/// Correlated Rician channel:
///
///   H = sqrt(K/(K+1)) A + 1/sqrt(K+1) * (1/sqrt(t)) C^{1/2} W C~^{1/2}
///
/// with W an r x t matrix of i.i.d. standard circular complex Gaussians.
/// Normalizations enforced on construction:
///   (1/r) tr(A A^H) = 1  (or A = 0 for pure Rayleigh, K = 0),
///   (1/r) tr(C) = 1,  (1/t) tr(C~) = 1,  C > 0,  C~ > 0,
///   K >= 0, sigma2 > 0.
struct ChannelModel {
  int r = 0;               ///< receive antennas
  int t = 0;               ///< transmit antennas
  double rician_k = 0.0;   ///< LOS-to-scatter power ratio
  MatrixC los;             ///< deterministic r x t component A
  MatrixC rx_corr;         ///< receive correlation C (r x r)
  MatrixC tx_corr;         ///< transmit correlation C~ (t x t)
  double sigma2 = 1.0;     ///< noise variance, linear power units

  /// Validating factory; throws std::invalid_argument on any broken
  /// invariant. Direct aggregate construction skips validation and is meant
  /// for internal use only.
  static ChannelModel make(int r, int t, double rician_k, MatrixC los,
                           MatrixC rx_corr, MatrixC tx_corr, double sigma2);

  void validate() const;
};

/// Transmit covariance constrained to the trace-normalized PSD cone:
/// Q >= 0 and (1/t) tr(Q) = 1.
struct CovarianceMatrix {
  MatrixC q;

  /// Validates Hermitian-ness, PSD-ness (eigenvalues >= -1e-12, clamped to
  /// zero) and the normalized trace; throws std::invalid_argument otherwise.
  static CovarianceMatrix make(const MatrixC& q);

  static CovarianceMatrix identity(int t);

  int dim() const { return static_cast<int>(q.rows()); }
};

/// One channel draw together with the stream coordinates that produced it.
struct ChannelRealization {
  MatrixC h;
  std::uint64_t seed = 0;
  std::int64_t trial = 0;
};

/// Exponentially decaying antenna correlation: M_ij = rho^|i-j|.
/// The diagonal is all ones so the normalized trace is already 1.
/// Requires 0 <= rho < 1.
MatrixC build_exponential_correlation(int n, double rho);

/// Line-of-sight matrix for a uniform linear receive array:
/// columns are steering vectors a(theta) = (1, e^{i theta}, ...,
/// e^{i(r-1)theta})^T scaled by per-path amplitudes, globally rescaled so
/// (1/r) tr(A A^H) = 1.
MatrixC build_los_steering(int r, int t, const std::vector<double>& angles_rad,
                           const std::vector<double>& amplitudes);

/// Draws the channel for a given (seed, trial) pair. Fully deterministic:
/// the same coordinates always produce the bit-identical matrix, regardless
/// of call order or thread count.
ChannelRealization sample_channel(const ChannelModel& model, std::uint64_t seed,
                                  std::int64_t trial);

/// Trace-normalized random PSD matrix (Wishart-style), full support on the
/// constraint set. Used by probes, validation runs and tests.
CovarianceMatrix random_covariance(int t, RngStream& rng);

/// Random Hermitian positive definite correlation matrix with normalized
/// trace; rectangular Wishart so the spectrum stays well conditioned.
MatrixC random_correlation(int n, RngStream& rng);

/// Random LOS matrix with (1/r) tr(A A^H) = 1.
MatrixC random_los(int r, int t, RngStream& rng);

}  // namespace ricemi

#endif  // RICEMI_MODEL_HPP
