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

#include "ricemi/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ricemi/detequiv.hpp"
#include "ricemi/errors.hpp"
#include "ricemi/mc.hpp"

namespace ricemi {

namespace {

using nlohmann::json;

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<double> default_snr_grid() {
  std::vector<double> grid;
  for (double snr = -5.0; snr <= 25.0 + 1e-9; snr += 2.5) grid.push_back(snr);
  return grid;
}

json nan_safe(double v) {
  if (std::isfinite(v)) return json(v);
  return json();  // null
}

ChannelModel random_model(int r, int t, double rician_k, double sigma2, RngStream& rng) {
  MatrixC c = random_correlation(r, rng);
  MatrixC ct = random_correlation(t, rng);
  MatrixC a = rician_k > 0.0 ? random_los(r, t, rng) : MatrixC::Zero(r, t);
  return ChannelModel::make(r, t, rician_k, std::move(a), std::move(c), std::move(ct), sigma2);
}

void rows_push(std::vector<ResultRow>& rows, const std::string& scenario, int r, int t,
               double snr_db, const std::string& quantity, double value,
               std::optional<double> std_error, std::uint64_t seed) {
  rows.push_back({scenario, r, t, snr_db, quantity, value, std_error, seed, std::nullopt});
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::accuracy_sweep: return "accuracy_sweep";
    case Scenario::optimize: return "optimize";
    case Scenario::compare_optimizers: return "compare_optimizers";
    case Scenario::validate: return "validate";
  }
  throw std::invalid_argument("unknown scenario");
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "accuracy_sweep") return Scenario::accuracy_sweep;
  if (name == "optimize") return Scenario::optimize;
  if (name == "compare_optimizers") return Scenario::compare_optimizers;
  if (name == "validate") return Scenario::validate;
  throw std::invalid_argument("unknown scenario: " + name);
}

ExperimentConfig ExperimentConfig::preset(Scenario s) {
  ExperimentConfig c;
  c.scenario = s;
  c.snr_db_grid = default_snr_grid();
  switch (s) {
    case Scenario::accuracy_sweep:
      c.dims = {{2, 2}, {4, 4}, {8, 8}};
      c.rician_k = 1.0;
      c.rho_t = 0.8;
      c.rho_r = 0.3;
      c.trials = 30000;
      c.tol = 1e-10;
      c.max_iter = 10000;
      c.output_path = "sweep.csv";
      break;
    case Scenario::optimize:
      c.dims = {{4, 4}};
      c.rician_k = 1.0;
      c.rho_t = 0.8;
      c.rho_r = 0.3;
      c.trials = 30000;
      c.tol = 1e-9;
      c.max_iter = 100;
      c.output_path = "optimize.csv";
      break;
    case Scenario::compare_optimizers:
      c.dims = {{4, 4}};
      c.rician_k = 1.0;
      c.rho_t = 0.5;
      c.rho_r = 0.8;
      c.snr_db_grid = {5.0, 15.0};
      c.trials = 30000;
      c.tol = 1e-9;
      c.max_iter = 80;
      c.output_path = "compare.csv";
      break;
    case Scenario::validate:
      c.dims = {{4, 4}};
      c.rician_k = 1.0;
      c.rho_t = 0.8;
      c.rho_r = 0.3;
      c.snr_db_grid = {10.0};
      c.trials = 20000;
      c.tol = 1e-10;
      c.max_iter = 10000;
      c.output_path = "";
      break;
  }
  return c;
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["scenario"] = to_string(scenario);
  json dims_json = json::array();
  for (const auto& [r, t] : dims) dims_json.push_back({r, t});
  j["dims"] = dims_json;
  j["K"] = rician_k;
  j["rho_T"] = rho_t;
  j["rho_R"] = rho_r;
  j["snr_db_grid"] = snr_db_grid;
  j["trials"] = trials;
  j["seed"] = seed;
  j["tol"] = tol;
  j["max_iter"] = max_iter;
  j["output_path"] = output_path;
  return j.dump();
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  if (!j.contains("scenario")) throw std::invalid_argument("config is missing 'scenario'");
  ExperimentConfig c = preset(scenario_from_string(j.at("scenario").get<std::string>()));
  try {
    if (j.contains("dims")) {
      c.dims.clear();
      for (const auto& pair : j.at("dims")) {
        if (!pair.is_array() || pair.size() != 2) {
          throw std::invalid_argument("config 'dims' entries must be [r, t] pairs");
        }
        c.dims.emplace_back(pair[0].get<int>(), pair[1].get<int>());
      }
    }
    if (j.contains("K")) c.rician_k = j.at("K").get<double>();
    if (j.contains("rho_T")) c.rho_t = j.at("rho_T").get<double>();
    if (j.contains("rho_R")) c.rho_r = j.at("rho_R").get<double>();
    if (j.contains("snr_db_grid")) c.snr_db_grid = j.at("snr_db_grid").get<std::vector<double>>();
    if (j.contains("trials")) c.trials = j.at("trials").get<std::int64_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<int>();
    if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config field error: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void ExperimentConfig::save(const std::string& path) const {
  write_text_file(path, to_json_text() + "\n");
}

void ExperimentConfig::validate() const {
  if (dims.empty()) throw std::invalid_argument("config: dims must not be empty");
  for (const auto& [r, t] : dims) {
    if (r < 1 || t < 1) throw std::invalid_argument("config: antenna counts must be positive");
  }
  if (!(rician_k >= 0.0) || !std::isfinite(rician_k)) {
    throw std::invalid_argument("config: K must be a nonnegative real");
  }
  if (!(rho_t >= 0.0 && rho_t < 1.0)) throw std::invalid_argument("config: rho_T must be in [0, 1)");
  if (!(rho_r >= 0.0 && rho_r < 1.0)) throw std::invalid_argument("config: rho_R must be in [0, 1)");
  if (scenario != Scenario::validate && snr_db_grid.empty()) {
    throw std::invalid_argument("config: snr_db_grid must not be empty");
  }
  if (trials < 2) throw std::invalid_argument("config: trials must be at least 2");
  if (!(tol > 0.0)) throw std::invalid_argument("config: tol must be positive");
  if (max_iter < 0) throw std::invalid_argument("config: max_iter must be nonnegative");
}

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
  return scenario == other.scenario && dims == other.dims && rician_k == other.rician_k &&
         rho_t == other.rho_t && rho_r == other.rho_r && snr_db_grid == other.snr_db_grid &&
         trials == other.trials && seed == other.seed && tol == other.tol &&
         max_iter == other.max_iter && output_path == other.output_path;
}

double sigma2_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

std::vector<double> preset_los_angles(int r, int t, std::uint64_t seed) {
  // One dedicated meta stream per antenna geometry, outside trial-id space.
  RngStream rng(seed, kMetaStreamBase + 0x100u + (static_cast<std::uint64_t>(r) << 16) +
                          static_cast<std::uint64_t>(t));
  std::vector<double> angles(static_cast<std::size_t>(t));
  for (double& a : angles) a = 2.0 * M_PI * rng.uniform();
  return angles;
}

ChannelModel make_preset_model(int r, int t, double rician_k, double rho_t,
                               double rho_r, std::uint64_t seed) {
  MatrixC c = build_exponential_correlation(r, rho_r);
  MatrixC ct = build_exponential_correlation(t, rho_t);
  MatrixC a;
  if (rician_k > 0.0) {
    const std::vector<double> angles = preset_los_angles(r, t, seed);
    const std::vector<double> amplitudes(static_cast<std::size_t>(t), 1.0);
    a = build_los_steering(r, t, angles, amplitudes);
  } else {
    a = MatrixC::Zero(r, t);
  }
  return ChannelModel::make(r, t, rician_k, std::move(a), std::move(c), std::move(ct), 1.0);
}

ChannelModel with_sigma2(ChannelModel model, double sigma2) {
  model.sigma2 = sigma2;
  model.validate();
  return model;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << text;
  if (!out) throw std::invalid_argument("write failed for output file: " + path);
}

std::string render_csv(const std::vector<ResultRow>& rows, const ExperimentConfig& config) {
  std::vector<ResultRow> sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.scenario != b.scenario) return a.scenario < b.scenario;
    if (a.r != b.r) return a.r < b.r;
    if (a.t != b.t) return a.t < b.t;
    if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
    return a.quantity < b.quantity;
  });

  const std::string config_text = config.to_json_text();
  std::ostringstream out;
  out << "# schema: " << kCsvSchema << "\n";
  out << "# artifact: ricemi " << kArtifactVersion << "\n";
  out << "# config_hash: " << fmt_hex(fnv1a_hash(config_text)) << "\n";
  out << "# config: " << config_text << "\n";
  if (config.rician_k > 0.0) {
    for (const auto& [r, t] : config.dims) {
      out << "# los_angles r=" << r << " t=" << t << " amplitudes=1:";
      for (double a : preset_los_angles(r, t, config.seed)) out << " " << fmt_g(a);
      out << "\n";
    }
  }
  out << "scenario,r,t,snr_db,quantity,value,stderr,seed,wall_time_ms\n";
  for (const ResultRow& row : sorted) {
    out << row.scenario << ',' << row.r << ',' << row.t << ',' << fmt_g(row.snr_db) << ','
        << row.quantity << ',' << fmt_g(row.value) << ',';
    if (row.std_error) out << fmt_g(*row.std_error);
    out << ',' << row.seed << ',';
    if (row.wall_ms) out << fmt_g(*row.wall_ms);
    out << '\n';
  }
  return out.str();
}

std::vector<ResultRow> run_accuracy_sweep(const ExperimentConfig& config) {
  config.validate();
  if (config.scenario != Scenario::accuracy_sweep) {
    throw std::invalid_argument("config scenario must be accuracy_sweep");
  }
  std::vector<ResultRow> rows;
  for (const auto& [r, t] : config.dims) {
    const ChannelModel base =
        make_preset_model(r, t, config.rician_k, config.rho_t, config.rho_r, config.seed);
    const CovarianceMatrix q = CovarianceMatrix::identity(t);
    for (double snr_db : config.snr_db_grid) {
      const ChannelModel model = with_sigma2(base, sigma2_from_snr_db(snr_db));
      const McEstimate mc = mc_emi(model, q, config.trials, config.seed);
      const EmiApproximation approx = emi_approx(model, q, config.tol, config.max_iter);
      const double rel_pct = 100.0 * std::abs(mc.mean - approx.value) / mc.mean;

      ResultRow mc_row{to_string(config.scenario), r, t, snr_db, "i_mc",
                       mc.mean,  mc.std_error, config.seed, std::nullopt};
      ResultRow ibar_row{to_string(config.scenario), r, t, snr_db, "i_bar",
                         approx.value, std::nullopt, config.seed, std::nullopt};
      ResultRow rel_row{to_string(config.scenario), r, t, snr_db, "rel_diff_pct",
                        rel_pct, std::nullopt, config.seed, std::nullopt};
      rows.push_back(std::move(mc_row));
      rows.push_back(std::move(ibar_row));
      rows.push_back(std::move(rel_row));
    }
  }
  return rows;
}

OptimizeRunResult run_optimize(const ExperimentConfig& config) {
  config.validate();
  if (config.scenario != Scenario::optimize) {
    throw std::invalid_argument("config scenario must be optimize");
  }
  OptimizeRunResult result;
  for (const auto& [r, t] : config.dims) {
    const ChannelModel base =
        make_preset_model(r, t, config.rician_k, config.rho_t, config.rho_r, config.seed);
    const CovarianceMatrix uniform = CovarianceMatrix::identity(t);
    for (double snr_db : config.snr_db_grid) {
      const ChannelModel model = with_sigma2(base, sigma2_from_snr_db(snr_db));
      auto [q_opt, trace] = optimize_covariance(model, config.tol, config.max_iter);
      const McEstimate mc_opt = mc_emi(model, q_opt, config.trials, config.seed);
      const McEstimate mc_uni = mc_emi(model, uniform, config.trials, config.seed);

      const auto& last = trace.iterations.back();
      const double iters = static_cast<double>(trace.iterations.size() - 1);
      const std::string sc = to_string(config.scenario);
      rows_push(result.rows, sc, r, t, snr_db, "i_bar_opt", last.i_bar, std::nullopt, config.seed);
      rows_push(result.rows, sc, r, t, snr_db, "i_mc_opt", mc_opt.mean, mc_opt.std_error,
                config.seed);
      rows_push(result.rows, sc, r, t, snr_db, "i_mc_uniform", mc_uni.mean, mc_uni.std_error,
                config.seed);
      rows_push(result.rows, sc, r, t, snr_db, "iterations", iters, std::nullopt, config.seed);
      rows_push(result.rows, sc, r, t, snr_db, "final_d_delta",
                std::isfinite(last.d_delta) ? last.d_delta : 0.0, std::nullopt, config.seed);
      rows_push(result.rows, sc, r, t, snr_db, "final_d_delta_tilde",
                std::isfinite(last.d_delta_tilde) ? last.d_delta_tilde : 0.0, std::nullopt,
                config.seed);
      rows_push(result.rows, sc, r, t, snr_db, "converged", trace.converged ? 1.0 : 0.0,
                std::nullopt, config.seed);

      for (const IterationRecord& rec : trace.iterations) {
        json line;
        line["r"] = r;
        line["t"] = t;
        line["snr_db"] = snr_db;
        line["k"] = rec.k;
        line["delta"] = rec.delta;
        line["delta_tilde"] = rec.delta_tilde;
        line["i_bar"] = rec.i_bar;
        line["d_delta"] = nan_safe(rec.d_delta);
        line["d_delta_tilde"] = nan_safe(rec.d_delta_tilde);
        line["dq_frobenius"] = nan_safe(rec.dq_frobenius);
        auto [q_vals, q_basis] = eigh(rec.q);
        line["q_eigenvalues"] = std::vector<double>(q_vals.data(), q_vals.data() + q_vals.size());
        result.trace_lines.push_back(line.dump());
      }
    }
  }
  return result;
}

std::vector<ResultRow> run_compare_optimizers(const ExperimentConfig& config) {
  config.validate();
  if (config.scenario != Scenario::compare_optimizers) {
    throw std::invalid_argument("config scenario must be compare_optimizers");
  }
  using clock = std::chrono::steady_clock;
  std::vector<ResultRow> rows;
  for (const auto& [r, t] : config.dims) {
    const ChannelModel base =
        make_preset_model(r, t, config.rician_k, config.rho_t, config.rho_r, config.seed);
    for (double snr_db : config.snr_db_grid) {
      const ChannelModel model = with_sigma2(base, sigma2_from_snr_db(snr_db));

      const auto t0 = clock::now();
      auto [q_asym, trace] = optimize_covariance(model, config.tol, config.max_iter);
      const double asym_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      const double asym_iters = std::max<std::size_t>(trace.iterations.size() - 1, 1);
      const double asym_ms_per_iter = asym_ms / asym_iters;

      auto [q_ref, diag] =
          mc_reference_optimizer(model, config.trials, config.seed, config.max_iter);

      const McEstimate mc_asym = mc_emi(model, q_asym, config.trials, config.seed);
      const McEstimate mc_ref = mc_emi(model, q_ref, config.trials, config.seed);
      const double combined =
          std::sqrt(mc_asym.std_error * mc_asym.std_error + mc_ref.std_error * mc_ref.std_error);

      const std::string sc = to_string(config.scenario);
      rows_push(rows, sc, r, t, snr_db, "i_mc_asymptotic", mc_asym.mean, mc_asym.std_error,
                config.seed);
      rows_push(rows, sc, r, t, snr_db, "i_mc_reference", mc_ref.mean, mc_ref.std_error,
                config.seed);
      rows_push(rows, sc, r, t, snr_db, "combined_stderr", combined, std::nullopt, config.seed);
      rows_push(rows, sc, r, t, snr_db, "abs_diff", std::abs(mc_asym.mean - mc_ref.mean),
                std::nullopt, config.seed);
      ResultRow asym_time{sc, r, t, snr_db, "iter_ms_asymptotic", asym_ms_per_iter,
                          std::nullopt, config.seed, asym_ms_per_iter};
      ResultRow ref_time{sc, r, t, snr_db, "iter_ms_reference", diag.avg_step_ms,
                         std::nullopt, config.seed, diag.avg_step_ms};
      rows.push_back(std::move(asym_time));
      rows.push_back(std::move(ref_time));
    }
  }
  return rows;
}

namespace {

void add_check(ValidationReport& report, const std::string& name, double margin,
               double tolerance, bool pass, const std::string& note = "") {
  report.checks.push_back({name, pass, margin, tolerance, note});
}

void add_check_leq(ValidationReport& report, const std::string& name, double margin,
                   double tolerance, const std::string& note = "") {
  add_check(report, name, margin, tolerance, margin <= tolerance, note);
}

}  // namespace

ValidationReport run_validate(const ExperimentConfig& config) {
  config.validate();
  ValidationReport report;
  const double fp_tol = config.tol;
  RngStream rng(config.seed, kMetaStreamBase + 0x9000u);

  // Invariant enforcement: a correlation matrix with the wrong trace must be
  // rejected at model construction.
  {
    bool rejected = false;
    std::string note;
    try {
      MatrixC bad = 1.7 * build_exponential_correlation(4, 0.5);
      ChannelModel::make(4, 4, 0.0, MatrixC::Zero(4, 4), build_exponential_correlation(4, 0.3),
                         bad, 1.0);
    } catch (const std::invalid_argument& e) {
      rejected = true;
      note = e.what();
    }
    add_check(report, "config_validation", rejected ? 1.0 : 0.0, 1.0, rejected, note);
  }

  // Random-model corpus shared by the algebraic checks.
  struct Case {
    ChannelModel model;
    CovarianceMatrix q;
  };
  std::vector<Case> corpus;
  for (int i = 0; i < 24; ++i) {
    const int r = 1 + static_cast<int>(rng.next_u64() % 6);
    const int t = 1 + static_cast<int>(rng.next_u64() % 6);
    const double k = 10.0 * rng.uniform();
    const double sigma2 = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
    corpus.push_back({random_model(r, t, k, sigma2, rng), random_covariance(t, rng)});
  }

  double worst_residual = 0.0;
  double worst_uniqueness = 0.0;
  double worst_form_gap_rician = 0.0;
  double worst_form_gap_generic = 0.0;
  double worst_scaling = 0.0;
  double worst_jbar_gap = 0.0;
  for (const Case& c : corpus) {
    const FixedPointSolution sol = solve_delta_system(c.model, c.q, fp_tol);
    worst_residual = std::max(worst_residual, sol.residual);

    const EmiApproximation approx = emi_approx(c.model, c.q, sol);
    worst_form_gap_rician =
        std::max(worst_form_gap_rician, approx.form_gap / std::max(1.0, std::abs(approx.value)));

    const GenericEquivModel reduced = virtual_channel_reduce(c.model, c.q);
    const BetaSolution beta = solve_beta_system(reduced, fp_tol);
    const BetaSolution beta_nested = solve_beta_system_nested(reduced, fp_tol);
    const double scale = std::sqrt(c.model.rician_k + 1.0);
    worst_scaling = std::max({worst_scaling,
                              std::abs(beta.beta - sol.delta / scale) /
                                  std::max(1.0, std::abs(beta.beta)),
                              std::abs(beta.beta_tilde - sol.delta_tilde / scale) /
                                  std::max(1.0, std::abs(beta.beta_tilde))});
    worst_uniqueness = std::max({worst_uniqueness,
                                 std::abs(beta.beta - beta_nested.beta) /
                                     std::max(1.0, std::abs(beta.beta)),
                                 std::abs(beta.beta_tilde - beta_nested.beta_tilde) /
                                     std::max(1.0, std::abs(beta.beta_tilde))});

    const auto [j_primary, j_alt] = j_bar_forms(reduced, beta);
    worst_form_gap_generic =
        std::max(worst_form_gap_generic,
                 std::abs(j_primary - j_alt) / std::max(1.0, std::abs(j_primary)));
    worst_jbar_gap = std::max(worst_jbar_gap, std::abs(j_primary - approx.value) /
                                                  std::max(1.0, std::abs(approx.value)));
  }
  add_check_leq(report, "fixed_point_residual", worst_residual, fp_tol);
  add_check_leq(report, "uniqueness_picard_vs_nested", worst_uniqueness, 1e-9);
  add_check_leq(report, "closed_forms_rician", worst_form_gap_rician, 1e-9);
  add_check_leq(report, "closed_forms_generic", worst_form_gap_generic, 1e-9);
  add_check_leq(report, "scaling_consistency", worst_scaling, 1e-9);
  add_check_leq(report, "jbar_matches_ibar", worst_jbar_gap, 1e-9);

  // Derivative identities of the variational objective, at and off the
  // solution, against central finite differences.
  {
    double worst_stationary = 0.0;
    double worst_offsol = 0.0;
    const double h = 1e-5;
    for (int i = 0; i < 6; ++i) {
      const Case& c = corpus[static_cast<std::size_t>(rng.next_u64() % corpus.size())];
      const auto [delta, delta_tilde] = deltas_of(c.model, c.q, fp_tol);
      auto v_at = [&](double k1, double k2) { return v_function(c.model, k1, k2, c.q); };
      const double dk = (v_at(delta + h, delta_tilde) - v_at(delta - h, delta_tilde)) / (2 * h);
      const double dkt = (v_at(delta, delta_tilde + h) - v_at(delta, delta_tilde - h)) / (2 * h);
      worst_stationary =
          std::max({worst_stationary, std::abs(dk) / c.model.t, std::abs(dkt) / c.model.t});

      const double kappa = delta * (1.0 + rng.uniform());
      const double kappa_tilde = delta_tilde * (1.0 + rng.uniform());
      const auto [f, f_tilde] = delta_maps(c.model, c.q, kappa, kappa_tilde);
      const double coef = -c.model.t * c.model.sigma2 / (c.model.rician_k + 1.0);
      const double closed_dk = coef * (kappa_tilde - f_tilde);
      const double closed_dkt = coef * (kappa - f);
      const double fd_dk = (v_at(kappa + h, kappa_tilde) - v_at(kappa - h, kappa_tilde)) / (2 * h);
      const double fd_dkt = (v_at(kappa, kappa_tilde + h) - v_at(kappa, kappa_tilde - h)) / (2 * h);
      worst_offsol = std::max({worst_offsol,
                               std::abs(closed_dk - fd_dk) / std::max(1.0, std::abs(closed_dk)),
                               std::abs(closed_dkt - fd_dkt) / std::max(1.0, std::abs(closed_dkt))});
    }
    add_check_leq(report, "stationarity_at_solution", worst_stationary, 1e-6);
    add_check_leq(report, "derivative_closed_forms", worst_offsol, 1e-5);
  }

  // Waterfilling optimality conditions on random PSD matrices.
  {
    double worst_kkt = 0.0;
    double worst_trace = 0.0;
    for (int i = 0; i < 50; ++i) {
      const int t = 2 + static_cast<int>(rng.next_u64() % 6);
      const MatrixC g = random_covariance(t, rng).q;  // PSD with spread spectrum
      const WaterfillResult wf = waterfill_detailed(g);
      if (wf.degenerate) continue;
      worst_trace = std::max(worst_trace, std::abs(wf.q_eigenvalues.sum() - t) / t);
      for (int j = 0; j < t; ++j) {
        const double gj = wf.g_eigenvalues[j];
        const double lj = wf.q_eigenvalues[j];
        if (lj > 0.0) {
          worst_kkt = std::max(worst_kkt,
                               std::abs(wf.water_level - 1.0 / gj - lj) / wf.water_level);
        } else if (gj > 0.0) {
          worst_kkt = std::max(worst_kkt, (wf.water_level - 1.0 / gj) / wf.water_level);
        }
      }
    }
    add_check_leq(report, "waterfilling_kkt", worst_kkt, 1e-12);
    add_check_leq(report, "waterfilling_trace", worst_trace, 1e-13);
  }

  // Concavity along random segments and the optimizer norm bound on the
  // configured presets.
  {
    const auto [r, t] = config.dims.front();
    const ChannelModel base =
        make_preset_model(r, t, config.rician_k, config.rho_t, config.rho_r, config.seed);
    const ChannelModel model =
        with_sigma2(base, sigma2_from_snr_db(config.snr_db_grid.empty()
                                                 ? 10.0
                                                 : config.snr_db_grid.front()));
    double worst_d2 = -1.0;
    int violations = 0;
    for (int i = 0; i < 10; ++i) {
      const CovarianceMatrix q1 = random_covariance(t, rng);
      const CovarianceMatrix q2 = random_covariance(t, rng);
      const ConcavityReport probe = concavity_probe(model, q1, q2, 21, fp_tol);
      violations += probe.violations;
      worst_d2 = std::max(worst_d2, probe.max_second_difference);
    }
    add_check(report, "concavity_probe", worst_d2, 1e-8, violations == 0,
              violations == 0 ? "" : std::to_string(violations) + " violations");

    auto [q_opt, trace] = optimize_covariance(model, 1e-9, 100);
    const double bound = 1.0 + 1.0 / trace.final_lambda_min_g;
    add_check_leq(report, "optimizer_norm_bound", trace.final_q_norm, bound,
                  "converged=" + std::to_string(trace.converged));

    // Monte-Carlo equivalence of the virtual-channel reduction.
    const CovarianceMatrix q = random_covariance(t, rng);
    const McEstimate direct = mc_emi(model, q, config.trials, config.seed);
    const McEstimate reduced =
        mc_emi_generic(virtual_channel_reduce(model, q), config.trials, config.seed + 1);
    const double combined = 3.0 * std::sqrt(direct.std_error * direct.std_error +
                                            reduced.std_error * reduced.std_error);
    add_check_leq(report, "virtual_channel_mc", std::abs(direct.mean - reduced.mean), combined);
  }

  report.all_pass = std::all_of(report.checks.begin(), report.checks.end(),
                                [](const ValidationCheck& c) { return c.pass; });
  return report;
}

std::string render_validation_report(const ValidationReport& report) {
  std::ostringstream out;
  for (const ValidationCheck& c : report.checks) {
    out << (c.pass ? "PASS" : "FAIL") << ' ' << c.name << " margin=" << fmt_g(c.margin)
        << " tol=" << fmt_g(c.tolerance);
    if (!c.note.empty()) out << "  (" << c.note << ')';
    out << '\n';
  }
  out << (report.all_pass ? "ALL CHECKS PASSED" : "VALIDATION FAILED") << '\n';
  return out.str();
}

}  // namespace ricemi
