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

#ifndef RICEMI_LINALG_HPP
#define RICEMI_LINALG_HPP

#include <complex>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ricemi {

using Complex = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using MatrixR = Eigen::MatrixXd;
using VectorR = Eigen::VectorXd;

/// Symmetrize a nominally Hermitian matrix, discarding rounding skew.
inline MatrixC hermitize(const MatrixC& m) { return 0.5 * (m + m.adjoint()); }

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching unitary basis.
std::pair<VectorR, MatrixC> eigh(const MatrixC& m);

/// Hermitian PSD square root with eigenvalue clamping at zero, so nearly
/// singular inputs (correlation matrices, waterfilled covariances) stay PSD.
MatrixC psd_sqrt(const MatrixC& m);

/// log det of a Hermitian positive definite matrix via Cholesky.
/// Throws numerical_error when the factorization fails, which signals a
/// corrupted (non-PD) argument upstream.
double logdet_hpd(const MatrixC& m);

/// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
double spectral_norm_hermitian(const MatrixC& m);

/// Pairwise (cascade) summation. The result depends only on the element
/// order in `values`, never on thread count, so parallel producers that fill
/// disjoint slots yield bit-identical totals.
double pairwise_sum(const std::vector<double>& values);
double pairwise_sum(const double* values, std::size_t n);

/// FNV-1a 64-bit hash, used to fingerprint configurations in output headers.
std::uint64_t fnv1a_hash(std::string_view text);

}  // namespace ricemi

#endif  // RICEMI_LINALG_HPP
