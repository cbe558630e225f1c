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

#ifndef RICEMI_RNG_HPP
#define RICEMI_RNG_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace ricemi {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Deterministic per-stream random generator (xoshiro256++ core).
///
/// A stream is identified by (seed, stream_id). Streams are statistically
/// independent and can be consumed in any order from any thread, which makes
/// Monte-Carlo results independent of scheduling: trial k always reads
/// stream (seed, k) from its beginning.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t h = detail::mix64(detail::mix64(seed) ^
                                    detail::mix64(stream_id + 0x632BE59BD9B4E019ull));
    for (auto& w : state_) {
      h = detail::mix64(h);
      w = h;
    }
    if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
      state_[0] = 0x9E3779B97F4A7C15ull;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; never returns 0 so log() is safe.
  double uniform_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard circular complex Gaussian: zero mean, E|z|^2 = 1, with
  /// independent real and imaginary parts of variance 1/2 each.
  std::complex<double> gaussian_c() {
    const double radius = std::sqrt(-std::log(uniform_open()));
    const double angle = 2.0 * M_PI * uniform();
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  std::array<std::uint64_t, 4> state_{};
};

/// Stream ids below this value are reserved for per-trial Monte-Carlo
/// streams; generator setup (steering angles, random test corpora, ...)
/// uses ids at or above it so metadata draws never collide with trials.
inline constexpr std::uint64_t kMetaStreamBase = 0x8000000000000000ull;

}  // namespace ricemi

#endif  // RICEMI_RNG_HPP
