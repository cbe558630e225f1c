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

#include "ricemi/linalg.hpp"

#include <cmath>

#include "ricemi/errors.hpp"

namespace ricemi {

std::pair<VectorR, MatrixC> eigh(const MatrixC& m) {
  Eigen::SelfAdjointEigenSolver<MatrixC> es(m);
  if (es.info() != Eigen::Success) {
    throw numerical_error("hermitian eigendecomposition failed");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

MatrixC psd_sqrt(const MatrixC& m) {
  auto [values, basis] = eigh(m);
  VectorR roots(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    roots[i] = values[i] > 0.0 ? std::sqrt(values[i]) : 0.0;
  }
  return hermitize(basis * roots.asDiagonal() * basis.adjoint());
}

double logdet_hpd(const MatrixC& m) {
  Eigen::LLT<MatrixC> llt(m);
  if (llt.info() != Eigen::Success) {
    throw numerical_error("cholesky factorization failed: argument is not positive definite");
  }
  const MatrixC l = llt.matrixL();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    sum += std::log(l(i, i).real());
  }
  return 2.0 * sum;
}

double spectral_norm_hermitian(const MatrixC& m) {
  Eigen::SelfAdjointEigenSolver<MatrixC> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw numerical_error("hermitian eigendecomposition failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double pairwise_sum(const double* values, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

double pairwise_sum(const std::vector<double>& values) {
  return pairwise_sum(values.data(), values.size());
}

std::uint64_t fnv1a_hash(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace ricemi
