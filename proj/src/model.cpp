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

#include "ricemi/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ricemi/errors.hpp"

namespace ricemi {

namespace {

constexpr double kTraceTol = 1e-12;
constexpr double kHermTol = 1e-12;

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

bool is_hermitian(const MatrixC& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= kHermTol * scale;
}

void check_correlation(const MatrixC& c, int n, const char* name) {
  require(c.rows() == n && c.cols() == n, std::string(name) + " has wrong dimensions");
  require(is_hermitian(c), std::string(name) + " is not Hermitian");
  Eigen::SelfAdjointEigenSolver<MatrixC> es(c, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, std::string(name) + " eigendecomposition failed");
  require(es.eigenvalues().minCoeff() > 0.0, std::string(name) + " is not positive definite");
  const double trace = c.trace().real() / n;
  require(std::abs(trace - 1.0) <= kTraceTol,
          std::string(name) + " trace is not normalized: (1/n) tr = " + std::to_string(trace));
}

}  // namespace

ChannelModel ChannelModel::make(int r, int t, double rician_k, MatrixC los,
                                MatrixC rx_corr, MatrixC tx_corr, double sigma2) {
  ChannelModel m;
  m.r = r;
  m.t = t;
  m.rician_k = rician_k;
  m.los = std::move(los);
  m.rx_corr = std::move(rx_corr);
  m.tx_corr = std::move(tx_corr);
  m.sigma2 = sigma2;
  m.validate();
  return m;
}

void ChannelModel::validate() const {
  require(r >= 1 && t >= 1, "antenna counts must be positive");
  require(std::isfinite(rician_k) && rician_k >= 0.0, "Rician factor must be a nonnegative real");
  require(std::isfinite(sigma2) && sigma2 > 0.0, "noise variance must be positive");
  require(los.rows() == r && los.cols() == t, "LOS matrix has wrong dimensions");
  const double los_power = los.squaredNorm() / r;
  const bool los_zero = los.cwiseAbs().maxCoeff() == 0.0;
  if (los_zero) {
    require(rician_k == 0.0, "zero LOS matrix requires K = 0");
  } else {
    require(std::abs(los_power - 1.0) <= kTraceTol,
            "LOS power is not normalized: (1/r) tr(A A^H) = " + std::to_string(los_power));
  }
  check_correlation(rx_corr, r, "receive correlation");
  check_correlation(tx_corr, t, "transmit correlation");
}

CovarianceMatrix CovarianceMatrix::make(const MatrixC& q) {
  require(q.rows() == q.cols() && q.rows() >= 1, "covariance must be square");
  require(is_hermitian(q), "covariance is not Hermitian");
  const int t = static_cast<int>(q.rows());
  auto [values, basis] = eigh(hermitize(q));
  require(values.minCoeff() >= -1e-12, "covariance has a negative eigenvalue below -1e-12");
  const double trace = values.sum() / t;
  require(std::abs(trace - 1.0) <= kTraceTol,
          "covariance trace is not normalized: (1/t) tr = " + std::to_string(trace));
  CovarianceMatrix out;
  if (values.minCoeff() < 0.0) {
    VectorR clamped = values.cwiseMax(0.0);
    out.q = hermitize(basis * clamped.asDiagonal() * basis.adjoint());
  } else {
    out.q = hermitize(q);
  }
  return out;
}

CovarianceMatrix CovarianceMatrix::identity(int t) {
  require(t >= 1, "dimension must be positive");
  CovarianceMatrix out;
  out.q = MatrixC::Identity(t, t);
  return out;
}

MatrixC build_exponential_correlation(int n, double rho) {
  require(n >= 1, "dimension must be positive");
  require(std::isfinite(rho) && rho >= 0.0 && rho < 1.0,
          "correlation coefficient must lie in [0, 1)");
  MatrixC m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      m(i, j) = Complex(std::pow(rho, std::abs(i - j)), 0.0);
    }
  }
  return m;
}

MatrixC build_los_steering(int r, int t, const std::vector<double>& angles_rad,
                           const std::vector<double>& amplitudes) {
  require(r >= 1 && t >= 1, "antenna counts must be positive");
  require(!angles_rad.empty(), "angle list must not be empty");
  require(static_cast<int>(angles_rad.size()) == t, "need one angle per transmit path");
  require(static_cast<int>(amplitudes.size()) == t, "need one amplitude per transmit path");
  for (double a : amplitudes) require(std::isfinite(a) && a > 0.0, "amplitudes must be positive");

  MatrixC a(r, t);
  const double col_scale = 1.0 / std::sqrt(static_cast<double>(t));
  for (int j = 0; j < t; ++j) {
    for (int i = 0; i < r; ++i) {
      a(i, j) = col_scale * amplitudes[j] *
                std::exp(Complex(0.0, angles_rad[j] * static_cast<double>(i)));
    }
  }
  const double power = a.squaredNorm() / r;
  a *= 1.0 / std::sqrt(power);
  return a;
}

ChannelRealization sample_channel(const ChannelModel& model, std::uint64_t seed,
                                  std::int64_t trial) {
  model.validate();
  const MatrixC rx_sqrt = psd_sqrt(model.rx_corr);
  const MatrixC tx_sqrt = psd_sqrt(model.tx_corr);

  RngStream rng(seed, static_cast<std::uint64_t>(trial));
  MatrixC w(model.r, model.t);
  for (int j = 0; j < model.t; ++j) {
    for (int i = 0; i < model.r; ++i) {
      w(i, j) = rng.gaussian_c();
    }
  }

  const double k = model.rician_k;
  const double scatter_scale = 1.0 / std::sqrt((k + 1.0) * model.t);
  ChannelRealization out;
  out.seed = seed;
  out.trial = trial;
  // K = 0 keeps the scattered term bit-exact: no LOS add at all.
  if (k > 0.0) {
    out.h = std::sqrt(k / (k + 1.0)) * model.los + scatter_scale * (rx_sqrt * w * tx_sqrt);
  } else {
    out.h = scatter_scale * (rx_sqrt * w * tx_sqrt);
  }
  return out;
}

CovarianceMatrix random_covariance(int t, RngStream& rng) {
  MatrixC z(t, t);
  for (int j = 0; j < t; ++j) {
    for (int i = 0; i < t; ++i) {
      z(i, j) = rng.gaussian_c();
    }
  }
  MatrixC q = hermitize(z * z.adjoint());
  q *= static_cast<double>(t) / q.trace().real();
  return CovarianceMatrix::make(q);
}

MatrixC random_correlation(int n, RngStream& rng) {
  MatrixC z(n, 2 * n);
  for (int j = 0; j < 2 * n; ++j) {
    for (int i = 0; i < n; ++i) {
      z(i, j) = rng.gaussian_c();
    }
  }
  MatrixC c = hermitize(z * z.adjoint());
  c *= static_cast<double>(n) / c.trace().real();
  return c;
}

MatrixC random_los(int r, int t, RngStream& rng) {
  MatrixC a(r, t);
  for (int j = 0; j < t; ++j) {
    for (int i = 0; i < r; ++i) {
      a(i, j) = rng.gaussian_c();
    }
  }
  a *= 1.0 / std::sqrt(a.squaredNorm() / r);
  return a;
}

}  // namespace ricemi
