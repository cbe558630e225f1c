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

#ifndef RICEMI_ERRORS_HPP
#define RICEMI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ricemi {

/// Raised when a computation produces values outside its numerical domain
/// (non-finite intermediates, Cholesky failure on a matrix that should be
/// positive definite, closed forms that disagree beyond tolerance).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an iterative solver cannot reach its tolerance, including the
/// guaranteed bisection fallback (which indicates an invariant violation
/// upstream rather than a plain convergence issue).
class solver_error : public std::runtime_error {
 public:
  explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ricemi

#endif  // RICEMI_ERRORS_HPP
