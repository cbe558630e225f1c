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

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "ricemi/experiments.hpp"

using namespace ricemi;

namespace {

ExperimentConfig tiny_sweep_config() {
  ExperimentConfig config = ExperimentConfig::preset(Scenario::accuracy_sweep);
  config.dims = {{2, 2}};
  config.snr_db_grid = {0.0, 10.0};
  config.trials = 500;
  return config;
}

}  // namespace

TEST_CASE("config round-trips through its JSON form for every scenario") {
  for (Scenario s : {Scenario::accuracy_sweep, Scenario::optimize,
                     Scenario::compare_optimizers, Scenario::validate}) {
    const ExperimentConfig original = ExperimentConfig::preset(s);
    const ExperimentConfig reparsed =
        ExperimentConfig::from_json_text(original.to_json_text());
    CHECK(reparsed == original);
    // serialization is canonical: a second round trip gives identical text
    CHECK(reparsed.to_json_text() == original.to_json_text());
  }
}

TEST_CASE("config file save and load") {
  const std::string path = "/tmp/ricemi_test_config.json";
  ExperimentConfig config = tiny_sweep_config();
  config.seed = 777;
  config.save(path);
  const ExperimentConfig loaded = ExperimentConfig::load(path);
  CHECK(loaded == config);
  std::remove(path.c_str());
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/nope.json"), std::invalid_argument);
}

TEST_CASE("config validation rejects broken fields before any computation") {
  ExperimentConfig config = tiny_sweep_config();
  config.snr_db_grid.clear();
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);

  config = tiny_sweep_config();
  config.trials = 1;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);

  config = tiny_sweep_config();
  config.rho_t = 1.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);

  config = tiny_sweep_config();
  config.dims.clear();
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);

  CHECK_THROWS_AS(ExperimentConfig::from_json_text("{not json"), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json_text("{}"), std::invalid_argument);
}

TEST_CASE("scenario mismatch is a configuration error") {
  const ExperimentConfig config = ExperimentConfig::preset(Scenario::optimize);
  CHECK_THROWS_AS(run_accuracy_sweep(config), std::invalid_argument);
}

TEST_CASE("sweep output is deterministic byte for byte") {
  const ExperimentConfig config = tiny_sweep_config();
  const std::string csv_a = render_csv(run_accuracy_sweep(config), config);
  const std::string csv_b = render_csv(run_accuracy_sweep(config), config);
  CHECK(csv_a == csv_b);
  CHECK(csv_a.find("# schema: ") != std::string::npos);
  CHECK(csv_a.find("# config_hash: ") != std::string::npos);
  CHECK(csv_a.find("scenario,r,t,snr_db,quantity,value,stderr,seed,wall_time_ms") !=
        std::string::npos);

  // a different seed changes the Monte-Carlo rows
  ExperimentConfig reseeded = config;
  reseeded.seed += 1;
  CHECK(render_csv(run_accuracy_sweep(reseeded), reseeded) != csv_a);
}

TEST_CASE("csv rendering sorts rows canonically") {
  const ExperimentConfig config = tiny_sweep_config();
  std::vector<ResultRow> rows = run_accuracy_sweep(config);
  std::vector<ResultRow> shuffled(rows.rbegin(), rows.rend());
  CHECK(render_csv(rows, config) == render_csv(shuffled, config));
}

TEST_CASE("optimize runner emits the cross-check quantities and a trace") {
  ExperimentConfig config = ExperimentConfig::preset(Scenario::optimize);
  config.dims = {{2, 2}};
  config.snr_db_grid = {10.0};
  config.trials = 2000;
  const OptimizeRunResult result = run_optimize(config);

  auto find = [&](const std::string& name) {
    const auto it = std::find_if(result.rows.begin(), result.rows.end(),
                                 [&](const ResultRow& r) { return r.quantity == name; });
    REQUIRE(it != result.rows.end());
    return *it;
  };
  const ResultRow opt = find("i_mc_opt");
  const ResultRow uniform = find("i_mc_uniform");
  REQUIRE(opt.std_error.has_value());
  CHECK(opt.value >= uniform.value - 3.0 * *opt.std_error);
  CHECK(find("iterations").value <= 10.0);
  CHECK(find("converged").value == 1.0);
  CHECK(!result.trace_lines.empty());
  CHECK(result.trace_lines.front().find("\"k\":0") != std::string::npos);
}

TEST_CASE("optimize runner honors a zero iteration budget") {
  ExperimentConfig config = ExperimentConfig::preset(Scenario::optimize);
  config.dims = {{2, 2}};
  config.snr_db_grid = {10.0};
  config.trials = 500;
  config.max_iter = 0;
  const OptimizeRunResult result = run_optimize(config);
  const auto it = std::find_if(result.rows.begin(), result.rows.end(),
                               [](const ResultRow& r) { return r.quantity == "converged"; });
  REQUIRE(it != result.rows.end());
  CHECK(it->value == 0.0);
}

TEST_CASE("validation suite passes on defaults and reports margins") {
  ExperimentConfig config = ExperimentConfig::preset(Scenario::validate);
  config.trials = 4000;
  const ValidationReport report = run_validate(config);
  CHECK(report.all_pass);
  CHECK(report.checks.size() >= 10);
  for (const ValidationCheck& check : report.checks) {
    CAPTURE(check.name);
    CHECK(check.pass);
    CHECK(std::isfinite(check.margin));
    CHECK(std::isfinite(check.tolerance));
  }
  const std::string text = render_validation_report(report);
  CHECK(text.find("ALL CHECKS PASSED") != std::string::npos);
  CHECK(text.find("config_validation") != std::string::npos);
}

TEST_CASE("file writing surfaces path errors") {
  CHECK_THROWS_AS(write_text_file("/nonexistent_dir/file.csv", "x"), std::invalid_argument);
}
