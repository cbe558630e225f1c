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

#ifndef RICEMI_EXPERIMENTS_HPP
#define RICEMI_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ricemi/model.hpp"
#include "ricemi/optim.hpp"

namespace ricemi {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr const char* kCsvSchema = "ricemi-results-v1";

enum class Scenario { accuracy_sweep, optimize, compare_optimizers, validate };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

/// Experiment description. Serializes to/from a canonical JSON document;
/// parse -> serialize -> parse is the identity, and the serialized form is
/// hashed into every output header so results carry their provenance.
struct ExperimentConfig {
  Scenario scenario = Scenario::accuracy_sweep;
  std::vector<std::pair<int, int>> dims;  ///< (r, t) pairs
  double rician_k = 1.0;
  double rho_t = 0.8;  ///< transmit correlation coefficient
  double rho_r = 0.3;  ///< receive correlation coefficient
  std::vector<double> snr_db_grid;
  std::int64_t trials = 30000;
  std::uint64_t seed = 4242;
  double tol = 1e-9;
  int max_iter = 100;
  std::string output_path;

  /// Scenario-specific defaults at desk scale.
  static ExperimentConfig preset(Scenario s);

  std::string to_json_text() const;
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  void save(const std::string& path) const;

  void validate() const;  ///< throws std::invalid_argument with the broken field
  bool operator==(const ExperimentConfig& other) const;
};

/// SNR convention: signal power is normalized by the trace constraint, so
/// SNR = 1/sigma2 and SNR_dB = -10 log10(sigma2).
double sigma2_from_snr_db(double snr_db);

/// Builds the standard experiment channel: exponential antenna correlation
/// with coefficients (rho_r, rho_t), steering-vector LOS with angles drawn
/// uniformly from the experiment seed and unit amplitudes (recorded in the
/// output metadata), at unit noise variance. K = 0 uses a zero LOS matrix.
ChannelModel make_preset_model(int r, int t, double rician_k, double rho_t,
                               double rho_r, std::uint64_t seed);

/// The angles used by make_preset_model, for metadata echoing.
std::vector<double> preset_los_angles(int r, int t, std::uint64_t seed);

/// Same model with a different noise variance.
ChannelModel with_sigma2(ChannelModel model, double sigma2);

/// One output record. std_error is empty for exact quantities; wall_ms is
/// only populated for timing quantities (deliberately nondeterministic).
struct ResultRow {
  std::string scenario;
  int r = 0;
  int t = 0;
  double snr_db = 0.0;
  std::string quantity;
  double value = 0.0;
  std::optional<double> std_error;
  std::uint64_t seed = 0;
  std::optional<double> wall_ms;
};

/// Renders rows in the canonical order with the commented header (schema id,
/// artifact version, config hash, echoed config, preset metadata).
std::string render_csv(const std::vector<ResultRow>& rows, const ExperimentConfig& config);

/// Writes text to a file; throws std::invalid_argument with path context.
void write_text_file(const std::string& path, const std::string& text);

/// Accuracy experiment: Monte-Carlo EMI vs the closed-form approximation at
/// Q = I over the (dims x SNR) grid; emits i_mc, i_bar and their relative
/// difference in percent.
std::vector<ResultRow> run_accuracy_sweep(const ExperimentConfig& config);

struct OptimizeRunResult {
  std::vector<ResultRow> rows;
  std::vector<std::string> trace_lines;  ///< one JSON record per iteration
};

/// Covariance optimization per SNR point: emits the approximation at the
/// optimum, the Monte-Carlo cross-check, iteration counts and final
/// multiplier increments; full per-iteration trace as JSON lines.
OptimizeRunResult run_optimize(const ExperimentConfig& config);

/// Runs the deterministic-equivalent optimizer and the Monte-Carlo
/// projected-gradient reference on identical models; emits both achieved
/// Monte-Carlo values, the combined standard error, and per-iteration wall
/// times for each method.
std::vector<ResultRow> run_compare_optimizers(const ExperimentConfig& config);

struct ValidationCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;     ///< measured worst-case quantity
  double tolerance = 0.0;  ///< limit it is compared against
  std::string note;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass = false;
};

/// Executes the full invariant suite: fixed-point residuals, closed-form
/// equalities, the scaling consistency between the two solver entry points,
/// partial-derivative identities, waterfilling KKT conditions, the concavity
/// probe, the optimizer norm bound, and the Monte-Carlo equivalence of the
/// virtual-channel reduction. Every check reports its measured margin.
ValidationReport run_validate(const ExperimentConfig& config);

std::string render_validation_report(const ValidationReport& report);

}  // namespace ricemi

#endif  // RICEMI_EXPERIMENTS_HPP
