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

// Benchmark of the OpenMP Monte-Carlo kernel against the serial reference.
// The two must agree bit-for-bit (per-trial streams + pairwise reduction);
// the speedup is whatever the machine gives.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ricemi/experiments.hpp"
#include "ricemi/mc.hpp"

int main(int argc, char** argv) {
  using clock = std::chrono::steady_clock;
  const std::int64_t trials = argc > 1 ? std::atoll(argv[1]) : 200000;
  const int n = argc > 2 ? std::atoi(argv[2]) : 8;

  const ricemi::ChannelModel model = ricemi::with_sigma2(
      ricemi::make_preset_model(n, n, 1.0, 0.8, 0.3, 4242), ricemi::sigma2_from_snr_db(10.0));
  const ricemi::CovarianceMatrix q = ricemi::CovarianceMatrix::identity(n);

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif
  std::printf("model: %dx%d, K=1, trials=%lld\n", n, n, static_cast<long long>(trials));

  const auto t0 = clock::now();
  const ricemi::McEstimate serial = ricemi::mc_emi_serial(model, q, trials, 7);
  const double serial_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();

  const auto t1 = clock::now();
  const ricemi::McEstimate parallel = ricemi::mc_emi(model, q, trials, 7);
  const double parallel_ms = std::chrono::duration<double, std::milli>(clock::now() - t1).count();

  std::printf("serial:   %10.1f ms   mean=%.12f stderr=%.3e\n", serial_ms, serial.mean,
              serial.std_error);
  std::printf("parallel: %10.1f ms   mean=%.12f stderr=%.3e\n", parallel_ms, parallel.mean,
              parallel.std_error);
  std::printf("speedup: %.2fx\n", serial_ms / parallel_ms);

  const bool identical =
      serial.mean == parallel.mean && serial.std_error == parallel.std_error;
  std::printf("bit-identical results: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
