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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "ricemi/experiments.hpp"
#include "ricemi/model.hpp"
#include "ricemi/rng.hpp"

using namespace ricemi;

TEST_CASE("exponential correlation: zero coefficient gives the identity") {
  const MatrixC m = build_exponential_correlation(3, 0.0);
  CHECK((m - MatrixC::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exponential correlation: 2x2 matrix at rho = 0.8") {
  const MatrixC m = build_exponential_correlation(2, 0.8);
  CHECK(m(0, 0).real() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m(0, 1).real() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(m(1, 0).real() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(m(1, 1).real() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exponential correlation: 3x3 Toeplitz is positive definite (eigensolve oracle)") {
  const MatrixC m = build_exponential_correlation(3, 0.5);
  auto [values, basis] = eigh(m);
  CHECK(values.minCoeff() > 0.0);
  CHECK(std::abs(m.trace().real() / 3.0 - 1.0) <= 1e-15);
}

TEST_CASE("exponential correlation: coefficient domain is enforced") {
  CHECK_THROWS_AS(build_exponential_correlation(3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_exponential_correlation(3, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(build_exponential_correlation(0, 0.5), std::invalid_argument);
}

TEST_CASE("steering LOS: scalar case is already normalized") {
  const MatrixC a = build_los_steering(1, 1, {0.0}, {1.0});
  CHECK(std::abs(a(0, 0) - Complex(1.0, 0.0)) <= 1e-15);
}

TEST_CASE("steering LOS: 2x2 with angles {0, pi} (direct arithmetic oracle)") {
  const MatrixC a = build_los_steering(2, 2, {0.0, M_PI}, {1.0, 1.0});
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(a(0, 0) - Complex(s, 0)) <= 1e-12);
  CHECK(std::abs(a(1, 0) - Complex(s, 0)) <= 1e-12);
  CHECK(std::abs(a(0, 1) - Complex(s, 0)) <= 1e-12);
  CHECK(std::abs(a(1, 1) - Complex(-s, 0)) <= 1e-12);
  CHECK(std::abs(a.squaredNorm() / 2.0 - 1.0) <= 1e-12);
}

TEST_CASE("steering LOS: random angles satisfy the power normalization") {
  RngStream rng(11, kMetaStreamBase);
  std::vector<double> angles(4);
  for (double& x : angles) x = 2.0 * M_PI * rng.uniform();
  const MatrixC a = build_los_steering(4, 4, angles, {1.0, 1.0, 1.0, 1.0});
  CHECK(std::abs(a.squaredNorm() / 4.0 - 1.0) <= 1e-12);
}

TEST_CASE("steering LOS: parameter errors") {
  CHECK_THROWS_AS(build_los_steering(2, 2, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_los_steering(2, 2, {0.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(build_los_steering(2, 2, {0.0, 0.0}, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("channel model invariants are enforced at construction") {
  const MatrixC eye2 = MatrixC::Identity(2, 2);
  // wrong transmit-correlation trace
  CHECK_THROWS_AS(ChannelModel::make(2, 2, 0.0, MatrixC::Zero(2, 2), eye2, 1.5 * eye2, 1.0),
                  std::invalid_argument);
  // negative K
  CHECK_THROWS_AS(ChannelModel::make(2, 2, -1.0, MatrixC::Zero(2, 2), eye2, eye2, 1.0),
                  std::invalid_argument);
  // zero noise variance
  CHECK_THROWS_AS(ChannelModel::make(2, 2, 0.0, MatrixC::Zero(2, 2), eye2, eye2, 0.0),
                  std::invalid_argument);
  // unnormalized LOS with K > 0
  CHECK_THROWS_AS(ChannelModel::make(2, 2, 1.0, 2.0 * eye2, eye2, eye2, 1.0),
                  std::invalid_argument);
  // zero LOS requires K = 0
  CHECK_THROWS_AS(ChannelModel::make(2, 2, 1.0, MatrixC::Zero(2, 2), eye2, eye2, 1.0),
                  std::invalid_argument);
}

TEST_CASE("covariance constraint set membership") {
  CHECK_THROWS_AS(CovarianceMatrix::make(2.0 * MatrixC::Identity(3, 3)), std::invalid_argument);

  MatrixC indefinite = MatrixC::Identity(2, 2);
  indefinite(0, 0) = Complex(2.1, 0.0);
  indefinite(1, 1) = Complex(-0.1, 0.0);
  CHECK_THROWS_AS(CovarianceMatrix::make(indefinite), std::invalid_argument);

  // a tiny negative eigenvalue within tolerance is clamped to zero
  MatrixC near_psd = MatrixC::Identity(2, 2);
  near_psd(0, 0) = Complex(2.0 + 1e-13, 0.0);
  near_psd(1, 1) = Complex(-1e-13, 0.0);
  const CovarianceMatrix q = CovarianceMatrix::make(near_psd);
  auto [values, basis] = eigh(q.q);
  CHECK(values.minCoeff() >= 0.0);
}

TEST_CASE("channel sampling is deterministic in (seed, trial)") {
  const ChannelModel model = make_preset_model(3, 4, 1.0, 0.5, 0.3, 99);
  const ChannelRealization a = sample_channel(model, 1234, 7);
  const ChannelRealization b = sample_channel(model, 1234, 7);
  CHECK(a.h == b.h);
  const ChannelRealization c = sample_channel(model, 1234, 8);
  CHECK((a.h - c.h).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("LOS-dominant limit: huge K makes the channel deterministic") {
  const ChannelModel model = make_preset_model(4, 4, 1e12, 0.5, 0.3, 5);
  const ChannelRealization real = sample_channel(model, 42, 0);
  const double rel = (real.h - model.los).norm() / model.los.norm();
  CHECK(rel <= 1e-5);
}

TEST_CASE("pure Rayleigh: sampling equals the scattered term exactly") {
  const int r = 3, t = 4;
  const ChannelModel model = make_preset_model(r, t, 0.0, 0.6, 0.2, 77);
  const ChannelRealization sample = sample_channel(model, 31, 5);

  // independent reconstruction from the stream contract
  RngStream rng(31, 5);
  MatrixC w(r, t);
  for (int j = 0; j < t; ++j) {
    for (int i = 0; i < r; ++i) {
      w(i, j) = rng.gaussian_c();
    }
  }
  const MatrixC expected =
      (1.0 / std::sqrt(static_cast<double>(t))) *
      (psd_sqrt(model.rx_corr) * w * psd_sqrt(model.tx_corr));
  CHECK(sample.h == expected);
}

TEST_CASE("scattered entries have variance 1/t (sample-moment oracle)") {
  const int r = 8, t = 16;
  const int samples = 10000;
  const MatrixC eye_r = MatrixC::Identity(r, r);
  const MatrixC eye_t = MatrixC::Identity(t, t);
  const ChannelModel model =
      ChannelModel::make(r, t, 0.0, MatrixC::Zero(r, t), eye_r, eye_t, 1.0);

  double sum_sq = 0.0;
  for (int n = 0; n < samples; ++n) {
    sum_sq += sample_channel(model, 2024, n).h.squaredNorm();
  }
  const double total = static_cast<double>(samples) * r * t;
  const double mean_power = sum_sq / total;
  // |h|^2 is exponential with mean 1/t and standard deviation 1/t.
  const double std_err = (1.0 / t) / std::sqrt(total);
  CHECK(std::abs(mean_power - 1.0 / t) <= 3.0 * std_err);
}

TEST_CASE("random covariance and correlation helpers satisfy their constraints") {
  RngStream rng(5, kMetaStreamBase + 3);
  for (int i = 0; i < 20; ++i) {
    const CovarianceMatrix q = random_covariance(4, rng);
    auto [qv, qb] = eigh(q.q);
    CHECK(qv.minCoeff() >= 0.0);
    CHECK(std::abs(q.q.trace().real() / 4.0 - 1.0) <= 1e-12);

    const MatrixC c = random_correlation(3, rng);
    auto [cv, cb] = eigh(c);
    CHECK(cv.minCoeff() > 0.0);
    CHECK(std::abs(c.trace().real() / 3.0 - 1.0) <= 1e-12);

    const MatrixC a = random_los(3, 5, rng);
    CHECK(std::abs(a.squaredNorm() / 3.0 - 1.0) <= 1e-12);
  }
}
