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

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ricemi/errors.hpp"
#include "ricemi/experiments.hpp"
#include "ricemi/mc.hpp"
#include "ricemi/rician.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitSolverFailure = 3;

constexpr double kNatsToBits = 1.4426950408889634;  // 1 / ln 2

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::string format = "csv";
};

void attach_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config file");
  cmd->add_option("--out", opts.out_path, "output path (overrides config)");
  cmd->add_option("--seed", opts.seed, "experiment seed");
  cmd->add_option("--trials", opts.trials, "Monte-Carlo trials per point");
  cmd->add_option("--tol", opts.tol, "solver tolerance");
  cmd->add_option("--max-iter", opts.max_iter, "iteration budget");
  cmd->add_option("--format", opts.format, "output format (csv)");
}

ricemi::ExperimentConfig resolve_config(const CommonOptions& opts, ricemi::Scenario scenario) {
  ricemi::ExperimentConfig config = opts.config_path.empty()
                                        ? ricemi::ExperimentConfig::preset(scenario)
                                        : ricemi::ExperimentConfig::load(opts.config_path);
  if (config.scenario != scenario) {
    throw std::invalid_argument("config scenario does not match subcommand");
  }
  if (opts.seed) config.seed = *opts.seed;
  if (opts.trials) config.trials = *opts.trials;
  if (opts.tol) config.tol = *opts.tol;
  if (opts.max_iter) config.max_iter = *opts.max_iter;
  if (!opts.out_path.empty()) config.output_path = opts.out_path;
  if (opts.format != "csv") throw std::invalid_argument("unsupported format: " + opts.format);
  config.validate();
  return config;
}

void emit(const std::vector<ricemi::ResultRow>& rows, const ricemi::ExperimentConfig& config) {
  const std::string csv = ricemi::render_csv(rows, config);
  if (config.output_path.empty()) {
    std::cout << csv;
  } else {
    ricemi::write_text_file(config.output_path, csv);
    std::cout << "wrote " << rows.size() << " rows to " << config.output_path << "\n";
  }
}

// Single-model options for the one-shot `approx` and `mc` subcommands.
struct PointOptions {
  int r = 4;
  int t = 4;
  double rician_k = 1.0;
  double rho_t = 0.8;
  double rho_r = 0.3;
  std::vector<double> snr_db;
  bool bits = false;
};

void attach_point(CLI::App* cmd, PointOptions& opts) {
  cmd->add_option("--r", opts.r, "receive antennas")->check(CLI::PositiveNumber);
  cmd->add_option("--t", opts.t, "transmit antennas")->check(CLI::PositiveNumber);
  cmd->add_option("--k", opts.rician_k, "Rician factor (linear)");
  cmd->add_option("--rho-t", opts.rho_t, "transmit correlation coefficient");
  cmd->add_option("--rho-r", opts.rho_r, "receive correlation coefficient");
  cmd->add_option("--snr-db", opts.snr_db, "SNR grid points in dB");
  cmd->add_flag("--bits", opts.bits, "report mutual information in bits instead of nats");
}

int run_point_command(const CommonOptions& common, const PointOptions& point, bool monte_carlo) {
  ricemi::ExperimentConfig config =
      ricemi::ExperimentConfig::preset(ricemi::Scenario::accuracy_sweep);
  config.dims = {{point.r, point.t}};
  config.rician_k = point.rician_k;
  config.rho_t = point.rho_t;
  config.rho_r = point.rho_r;
  if (!point.snr_db.empty()) config.snr_db_grid = point.snr_db;
  if (common.seed) config.seed = *common.seed;
  if (common.trials) config.trials = *common.trials;
  if (common.tol) config.tol = *common.tol;
  if (common.max_iter) config.max_iter = *common.max_iter;
  if (!common.out_path.empty()) config.output_path = common.out_path;
  else config.output_path.clear();  // default to stdout for one-shot queries
  if (common.format != "csv") throw std::invalid_argument("unsupported format: " + common.format);
  config.validate();

  const double unit = point.bits ? kNatsToBits : 1.0;
  const std::string suffix = point.bits ? "_bits" : "";
  const ricemi::ChannelModel base = ricemi::make_preset_model(
      point.r, point.t, point.rician_k, point.rho_t, point.rho_r, config.seed);
  const ricemi::CovarianceMatrix q = ricemi::CovarianceMatrix::identity(point.t);

  std::vector<ricemi::ResultRow> rows;
  for (double snr_db : config.snr_db_grid) {
    const ricemi::ChannelModel model =
        ricemi::with_sigma2(base, ricemi::sigma2_from_snr_db(snr_db));
    if (monte_carlo) {
      const ricemi::McEstimate est = ricemi::mc_emi(model, q, config.trials, config.seed);
      rows.push_back({"mc", point.r, point.t, snr_db, "i_mc" + suffix, unit * est.mean,
                      unit * est.std_error, config.seed, std::nullopt});
    } else {
      const ricemi::EmiApproximation approx =
          ricemi::emi_approx(model, q, config.tol, config.max_iter);
      rows.push_back({"approx", point.r, point.t, snr_db, "i_bar" + suffix,
                      unit * approx.value, std::nullopt, config.seed, std::nullopt});
      rows.push_back({"approx", point.r, point.t, snr_db, "delta", approx.delta, std::nullopt,
                      config.seed, std::nullopt});
      rows.push_back({"approx", point.r, point.t, snr_db, "delta_tilde", approx.delta_tilde,
                      std::nullopt, config.seed, std::nullopt});
    }
  }
  emit(rows, config);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-system analysis and covariance optimization for correlated Rician MIMO channels"};
  app.require_subcommand(1);

  CommonOptions sweep_opts, optimize_opts, compare_opts, validate_opts, approx_opts, mc_opts;
  PointOptions approx_point, mc_point;

  CLI::App* sweep = app.add_subcommand("sweep", "Monte-Carlo vs closed-form accuracy sweep");
  attach_common(sweep, sweep_opts);
  CLI::App* optimize = app.add_subcommand("optimize", "optimize the transmit covariance per SNR");
  attach_common(optimize, optimize_opts);
  CLI::App* compare =
      app.add_subcommand("compare", "compare the optimizer against the Monte-Carlo reference");
  attach_common(compare, compare_opts);
  CLI::App* validate = app.add_subcommand("validate", "run the invariant validation suite");
  attach_common(validate, validate_opts);
  CLI::App* approx = app.add_subcommand("approx", "closed-form EMI approximation at Q = I");
  attach_common(approx, approx_opts);
  attach_point(approx, approx_point);
  CLI::App* mc = app.add_subcommand("mc", "Monte-Carlo EMI estimate at Q = I");
  attach_common(mc, mc_opts);
  attach_point(mc, mc_point);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (sweep->parsed()) {
      const auto config = resolve_config(sweep_opts, ricemi::Scenario::accuracy_sweep);
      emit(ricemi::run_accuracy_sweep(config), config);
      return kExitOk;
    }
    if (optimize->parsed()) {
      const auto config = resolve_config(optimize_opts, ricemi::Scenario::optimize);
      const ricemi::OptimizeRunResult result = ricemi::run_optimize(config);
      emit(result.rows, config);
      const std::string trace_path =
          (config.output_path.empty() ? std::string("optimize") : config.output_path) +
          ".trace.jsonl";
      std::string trace_text;
      for (const std::string& line : result.trace_lines) trace_text += line + "\n";
      ricemi::write_text_file(trace_path, trace_text);
      std::cout << "wrote " << result.trace_lines.size() << " trace records to " << trace_path
                << "\n";
      return kExitOk;
    }
    if (compare->parsed()) {
      const auto config = resolve_config(compare_opts, ricemi::Scenario::compare_optimizers);
      emit(ricemi::run_compare_optimizers(config), config);
      return kExitOk;
    }
    if (validate->parsed()) {
      const auto config = resolve_config(validate_opts, ricemi::Scenario::validate);
      const ricemi::ValidationReport report = ricemi::run_validate(config);
      const std::string text = ricemi::render_validation_report(report);
      std::cout << text;
      if (!config.output_path.empty()) ricemi::write_text_file(config.output_path, text);
      return report.all_pass ? kExitOk : kExitValidationFailure;
    }
    if (approx->parsed()) return run_point_command(approx_opts, approx_point, false);
    if (mc->parsed()) return run_point_command(mc_opts, mc_point, true);
  } catch (const ricemi::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitSolverFailure;
  } catch (const ricemi::solver_error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolverFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
