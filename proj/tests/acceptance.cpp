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

// Acceptance suite: end-to-end checks of the library against its contract,
// one printed line per criterion. Exit code is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "ricemi/detequiv.hpp"
#include "ricemi/experiments.hpp"
#include "ricemi/mc.hpp"
#include "ricemi/optim.hpp"
#include "ricemi/rician.hpp"
#include "ricemi/rng.hpp"

using namespace ricemi;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s criterion-%d (%s): %s\n", pass ? "PASS" : "FAIL", index, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

ChannelModel random_model(int r, int t, double rician_k, double sigma2, RngStream& rng) {
  MatrixC c = random_correlation(r, rng);
  MatrixC ct = random_correlation(t, rng);
  MatrixC a = rician_k > 0.0 ? random_los(r, t, rng) : MatrixC::Zero(r, t);
  return ChannelModel::make(r, t, rician_k, std::move(a), std::move(c), std::move(ct), sigma2);
}

struct Corpus {
  std::vector<ChannelModel> models;
  std::vector<CovarianceMatrix> covariances;
};

Corpus build_corpus(int count, std::uint64_t seed) {
  Corpus corpus;
  RngStream rng(seed, kMetaStreamBase + 0x7000u);
  for (int i = 0; i < count; ++i) {
    const int r = 1 + static_cast<int>(rng.next_u64() % 8);
    const int t = 1 + static_cast<int>(rng.next_u64() % 8);
    const double k = 10.0 * rng.uniform();
    const double sigma2 = std::pow(10.0, -2.0 + 4.0 * rng.uniform());
    corpus.models.push_back(random_model(r, t, k, sigma2, rng));
    corpus.covariances.push_back(random_covariance(t, rng));
  }
  return corpus;
}

// ---- criteria 1 and 10: accuracy sweep at the published operating point ----

std::map<std::pair<int, double>, double> g_rel_errors;  // (n, snr) -> percent

void criterion_accuracy() {
  const ExperimentConfig config = ExperimentConfig::preset(Scenario::accuracy_sweep);
  double worst2 = 0.0, worst8 = 0.0, worst_stderr = 0.0;
  for (const auto& [r, t] : config.dims) {
    const ChannelModel base =
        make_preset_model(r, t, config.rician_k, config.rho_t, config.rho_r, config.seed);
    const CovarianceMatrix q = CovarianceMatrix::identity(t);
    for (double snr_db : config.snr_db_grid) {
      const ChannelModel model = with_sigma2(base, sigma2_from_snr_db(snr_db));
      const McEstimate mc = mc_emi(model, q, config.trials, config.seed);
      const double i_bar = emi_approx(model, q, config.tol, config.max_iter).value;
      const double rel_pct = 100.0 * std::abs(mc.mean - i_bar) / mc.mean;
      g_rel_errors[{t, snr_db}] = rel_pct;
      worst_stderr = std::max(worst_stderr, mc.std_error);
      if (t == 2) worst2 = std::max(worst2, rel_pct);
      if (t == 8) worst8 = std::max(worst8, rel_pct);
    }
  }
  const bool pass = worst2 <= 5.0 && worst8 <= 1.0;
  report(1, "accuracy-sweep", pass,
         "max rel diff 2x2 = " + fmt(worst2) + "% (<= 5%), 8x8 = " + fmt(worst8) +
             "% (<= 1%), max MC stderr = " + fmt(worst_stderr) + " nats, 30000 trials");
}

void criterion_accuracy_trend() {
  bool pass = true;
  double worst_gap = -1e9;
  for (const auto& [key, rel2] : g_rel_errors) {
    if (key.first != 2) continue;
    const auto it8 = g_rel_errors.find({8, key.second});
    if (it8 == g_rel_errors.end()) continue;
    if (it8->second >= rel2) pass = false;
    worst_gap = std::max(worst_gap, it8->second - rel2);
  }
  report(10, "accuracy-trend", pass,
         std::string("rel error at 8x8 below 2x2 at every common SNR point; worst margin = ") +
             fmt(-worst_gap) + "%");
}

// ---- criterion 2: fixed-point correctness on a 200-model corpus ----

void criterion_fixed_point(const Corpus& corpus) {
  double worst_residual = 0.0;
  double worst_route_gap = 0.0;
  for (std::size_t i = 0; i < corpus.models.size(); ++i) {
    const ChannelModel& model = corpus.models[i];
    const CovarianceMatrix& q = corpus.covariances[i];
    const FixedPointSolution sol = solve_delta_system(model, q, 1e-10);
    worst_residual = std::max(worst_residual, sol.residual);

    const BetaSolution nested =
        solve_beta_system_nested(virtual_channel_reduce(model, q), 1e-10);
    const double scale = std::sqrt(model.rician_k + 1.0);
    worst_route_gap = std::max(
        {worst_route_gap,
         std::abs(sol.delta - scale * nested.beta) / std::max(1.0, sol.delta),
         std::abs(sol.delta_tilde - scale * nested.beta_tilde) /
             std::max(1.0, sol.delta_tilde)});
  }
  const bool pass = worst_residual <= 1e-10 && worst_route_gap <= 1e-9;
  report(2, "fixed-point-correctness", pass,
         "200 random models: max residual = " + fmt(worst_residual) +
             " (<= 1e-10), iteration-vs-bisection gap = " + fmt(worst_route_gap) +
             " (<= 1e-9)");
}

// ---- criterion 3: closed-form equalities ----

void criterion_closed_forms(const Corpus& corpus) {
  double worst_rician = 0.0;
  double worst_generic = 0.0;
  for (std::size_t i = 0; i < corpus.models.size(); ++i) {
    const ChannelModel& model = corpus.models[i];
    const CovarianceMatrix& q = corpus.covariances[i];
    const EmiApproximation approx = emi_approx(model, q);
    worst_rician = std::max(worst_rician,
                            approx.form_gap / std::max(1.0, std::abs(approx.value)));

    const GenericEquivModel reduced = virtual_channel_reduce(model, q);
    const auto [jp, ja] = j_bar_forms(reduced, solve_beta_system(reduced));
    worst_generic =
        std::max(worst_generic, std::abs(jp - ja) / std::max(1.0, std::abs(jp)));
  }
  const bool pass = worst_rician <= 1e-9 && worst_generic <= 1e-9;
  report(3, "closed-form-equality", pass,
         "max form gap: rician = " + fmt(worst_rician) + ", generic = " + fmt(worst_generic) +
             " (both <= 1e-9 relative)");
}

// ---- criterion 4: consistency chain ----

void criterion_consistency_chain(const Corpus& corpus) {
  double worst_scaling = 0.0;
  double worst_jbar = 0.0;
  for (std::size_t i = 0; i < corpus.models.size(); ++i) {
    const ChannelModel& model = corpus.models[i];
    const CovarianceMatrix& q = corpus.covariances[i];
    const FixedPointSolution sol = solve_delta_system(model, q, 1e-11);
    const GenericEquivModel reduced = virtual_channel_reduce(model, q);
    const BetaSolution beta = solve_beta_system(reduced, 1e-11);
    const double scale = std::sqrt(model.rician_k + 1.0);
    worst_scaling = std::max(
        {worst_scaling, std::abs(beta.beta - sol.delta / scale) / std::max(1.0, beta.beta),
         std::abs(beta.beta_tilde - sol.delta_tilde / scale) /
             std::max(1.0, beta.beta_tilde)});
    const double i_bar = emi_approx(model, q, sol).value;
    const double j = j_bar(reduced, beta);
    worst_jbar =
        std::max(worst_jbar, std::abs(i_bar - j) / std::max(1.0, std::abs(i_bar)));
  }

  RngStream rng(4242, kMetaStreamBase + 0x7100u);
  const ChannelModel model =
      with_sigma2(make_preset_model(4, 4, 1.0, 0.8, 0.3, 4242), sigma2_from_snr_db(10.0));
  const CovarianceMatrix q = random_covariance(4, rng);
  const McEstimate direct = mc_emi(model, q, 100000, 13);
  const McEstimate reduced_mc = mc_emi_generic(virtual_channel_reduce(model, q), 100000, 14);
  const double combined = std::sqrt(direct.std_error * direct.std_error +
                                    reduced_mc.std_error * reduced_mc.std_error);
  const double mc_gap = std::abs(direct.mean - reduced_mc.mean);

  const bool pass = worst_scaling <= 1e-9 && worst_jbar <= 1e-9 && mc_gap <= 3.0 * combined;
  report(4, "consistency-chain", pass,
         "multiplier scaling gap = " + fmt(worst_scaling) + " (<= 1e-9), closed-form gap = " +
             fmt(worst_jbar) + " (<= 1e-9), MC equivalence gap = " + fmt(mc_gap) + " (<= " +
             fmt(3.0 * combined) + " at 1e5 trials)");
}

// ---- criterion 5: stationarity identities ----

void criterion_stationarity() {
  RngStream rng(4242, kMetaStreamBase + 0x7200u);
  const double h = 1e-5;
  double worst_at_solution = 0.0;
  double worst_off_solution = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int r = 2 + static_cast<int>(rng.next_u64() % 4);
    const int t = 2 + static_cast<int>(rng.next_u64() % 4);
    const double k = 6.0 * rng.uniform();
    const ChannelModel model = random_model(r, t, k, std::pow(10.0, -1.0 + 2.0 * rng.uniform()), rng);
    const CovarianceMatrix q = random_covariance(t, rng);
    const auto [delta, delta_tilde] = deltas_of(model, q, 1e-12);
    auto v_at = [&](double a, double b) { return v_function(model, a, b, q); };

    const double dk = (v_at(delta + h, delta_tilde) - v_at(delta - h, delta_tilde)) / (2 * h);
    const double dkt = (v_at(delta, delta_tilde + h) - v_at(delta, delta_tilde - h)) / (2 * h);
    worst_at_solution =
        std::max({worst_at_solution, std::abs(dk) / t, std::abs(dkt) / t});

    const double kappa = delta * (1.2 + rng.uniform());
    const double kappa_tilde = delta_tilde * (1.2 + rng.uniform());
    const auto [f, f_tilde] = delta_maps(model, q, kappa, kappa_tilde);
    const double coef = -model.t * model.sigma2 / (model.rician_k + 1.0);
    const double closed_dk = coef * (kappa_tilde - f_tilde);
    const double closed_dkt = coef * (kappa - f);
    const double fd_dk = (v_at(kappa + h, kappa_tilde) - v_at(kappa - h, kappa_tilde)) / (2 * h);
    const double fd_dkt = (v_at(kappa, kappa_tilde + h) - v_at(kappa, kappa_tilde - h)) / (2 * h);
    worst_off_solution = std::max(
        {worst_off_solution, std::abs(closed_dk - fd_dk) / std::max(1.0, std::abs(closed_dk)),
         std::abs(closed_dkt - fd_dkt) / std::max(1.0, std::abs(closed_dkt))});
  }
  const bool pass = worst_at_solution <= 1e-6 && worst_off_solution <= 1e-5;
  report(5, "stationarity-identities", pass,
         "max |dV|/t at solution = " + fmt(worst_at_solution) +
             " (<= 1e-6), off-solution closed-vs-FD = " + fmt(worst_off_solution) +
             " (<= 1e-5 relative)");
}

// ---- criterion 6: waterfilling ----

void criterion_waterfilling() {
  bool pass = true;
  std::string detail;

  MatrixC g1 = MatrixC::Zero(2, 2);
  g1(0, 0) = 3.0;
  g1(1, 1) = 1.0;
  const WaterfillResult wf1 = waterfill_detailed(g1);
  pass &= std::abs(wf1.q.q(0, 0).real() - 4.0 / 3.0) <= 1e-12 &&
          std::abs(wf1.q.q(1, 1).real() - 2.0 / 3.0) <= 1e-12 &&
          std::abs(wf1.water_level - 5.0 / 3.0) <= 1e-12;

  MatrixC g2 = MatrixC::Zero(2, 2);
  g2(0, 0) = 10.0;
  g2(1, 1) = 0.01;
  const WaterfillResult wf2 = waterfill_detailed(g2);
  pass &= std::abs(wf2.q.q(0, 0).real() - 2.0) <= 1e-12 &&
          std::abs(wf2.q.q(1, 1).real()) <= 1e-12 && std::abs(wf2.water_level - 2.1) <= 1e-12;

  RngStream rng(4242, kMetaStreamBase + 0x7300u);
  double worst_kkt = 0.0;
  double worst_trace = 0.0;
  for (int i = 0; i < 500; ++i) {
    const int t = 2 + static_cast<int>(rng.next_u64() % 7);
    const MatrixC g = random_covariance(t, rng).q * (0.05 + 10.0 * rng.uniform());
    const WaterfillResult wf = waterfill_detailed(g);
    if (wf.degenerate) continue;
    worst_trace = std::max(worst_trace, std::abs(wf.q_eigenvalues.sum() - t) / t);
    for (int j = 0; j < t; ++j) {
      if (wf.q_eigenvalues[j] > 0.0) {
        worst_kkt = std::max(worst_kkt, std::abs(wf.water_level - 1.0 / wf.g_eigenvalues[j] -
                                                 wf.q_eigenvalues[j]) /
                                            wf.water_level);
      } else if (wf.g_eigenvalues[j] > 0.0) {
        worst_kkt =
            std::max(worst_kkt, (wf.water_level - 1.0 / wf.g_eigenvalues[j]) / wf.water_level);
      }
    }
  }
  pass &= worst_kkt <= 1e-12 && worst_trace <= 1e-13;
  report(6, "waterfilling", pass,
         "hand cases to 1e-12; 500 random PSD matrices: max KKT defect = " + fmt(worst_kkt) +
             " (<= 1e-12), max trace defect = " + fmt(worst_trace) + " (<= 1e-13)");
}

// ---- criterion 7: optimizer correctness ----

void criterion_optimizer() {
  bool pass = true;
  std::string detail;

  // (a) uncorrelated Rician: eigenvectors align with the LOS right singular basis
  {
    RngStream rng(4242, kMetaStreamBase + 0x7400u);
    const int n = 4;
    const ChannelModel model =
        ChannelModel::make(n, n, 1.0, random_los(n, n, rng), MatrixC::Identity(n, n),
                           MatrixC::Identity(n, n), sigma2_from_snr_db(10.0));
    auto [q, trace] = optimize_covariance(model);
    Eigen::JacobiSVD<MatrixC> svd(model.los, Eigen::ComputeFullV);
    const MatrixC v = svd.matrixV();
    auto [q_values, q_basis] = eigh(q.q);
    double worst_angle = 0.0;
    for (int j = 0; j < n; ++j) {
      bool distinct = true;
      for (int i = 0; i < n; ++i) {
        if (i != j && std::abs(q_values[i] - q_values[j]) < 1e-9) distinct = false;
      }
      if (!distinct) continue;
      double best_overlap = 0.0;
      for (int i = 0; i < n; ++i) {
        best_overlap =
            std::max(best_overlap, std::abs((v.col(i).adjoint() * q_basis.col(j))(0, 0)));
      }
      worst_angle = std::max(worst_angle, std::acos(std::min(1.0, best_overlap)));
    }
    pass &= trace.converged && worst_angle <= 1e-6;
    detail += "alignment angle = " + fmt(worst_angle) + " rad (<= 1e-6)";
  }

  // (b) global optimality against 1000 random competitors on both presets
  {
    RngStream rng(4242, kMetaStreamBase + 0x7500u);
    double worst_short = -1e9;
    for (int n : {2, 4}) {
      const ChannelModel model =
          with_sigma2(make_preset_model(n, n, 1.0, 0.8, 0.3, 4242), sigma2_from_snr_db(10.0));
      auto [q_star, trace] = optimize_covariance(model);
      const double best = trace.iterations.back().i_bar;
      pass &= trace.converged;
      pass &= best >= emi_approx(model, CovarianceMatrix::identity(n)).value - 1e-9;
      for (int i = 0; i < 1000; ++i) {
        const double candidate = emi_approx(model, random_covariance(n, rng)).value;
        worst_short = std::max(worst_short, candidate - best);
      }
      // (c) norm bound on every run
      pass &= trace.final_q_norm <= 1.0 + 1.0 / trace.final_lambda_min_g + 1e-9;
    }
    pass &= worst_short <= 1e-9;
    detail += ", best random-search excess = " + fmt(worst_short) +
              " (<= 1e-9), norm bound held on every run";
  }
  report(7, "optimizer-correctness", pass, detail);
}

// ---- criterion 8: comparison against the Monte-Carlo reference ----

void criterion_comparison() {
  using clock = std::chrono::steady_clock;
  bool pass = true;
  std::string detail;
  const ChannelModel base = make_preset_model(4, 4, 1.0, 0.5, 0.8, 4242);
  for (double snr_db : {5.0, 15.0}) {
    const ChannelModel model = with_sigma2(base, sigma2_from_snr_db(snr_db));

    const auto t0 = clock::now();
    auto [q_asym, trace] = optimize_covariance(model, 1e-9, 100);
    const double asym_ms =
        std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    const double asym_ms_per_iter =
        asym_ms / std::max<std::size_t>(trace.iterations.size() - 1, 1);

    auto [q_ref, diag] = mc_reference_optimizer(model, 30000, 4242, 80);

    const McEstimate mc_asym = mc_emi(model, q_asym, 30000, 4242);
    const McEstimate mc_ref = mc_emi(model, q_ref, 30000, 4242);
    const double combined = std::sqrt(mc_asym.std_error * mc_asym.std_error +
                                      mc_ref.std_error * mc_ref.std_error);
    const double gap = std::abs(mc_asym.mean - mc_ref.mean);
    const double speed_ratio = diag.avg_step_ms / asym_ms_per_iter;
    pass &= gap <= 3.0 * combined && speed_ratio >= 10.0;
    detail += "snr " + fmt(snr_db) + ": gap = " + fmt(gap) + " (<= " + fmt(3.0 * combined) +
              "), per-iteration speedup = " + fmt(speed_ratio) + "x (>= 10); ";
  }
  report(8, "optimizer-comparison", pass, detail);
}

// ---- criterion 9: concavity along random segments ----

void criterion_concavity() {
  RngStream rng(4242, kMetaStreamBase + 0x7600u);
  const ChannelModel model =
      with_sigma2(make_preset_model(4, 4, 1.0, 0.8, 0.3, 4242), sigma2_from_snr_db(10.0));
  int violations = 0;
  double worst = -1e9;
  for (int i = 0; i < 50; ++i) {
    const CovarianceMatrix q1 = random_covariance(4, rng);
    const CovarianceMatrix q2 = random_covariance(4, rng);
    const ConcavityReport probe = concavity_probe(model, q1, q2, 21);
    violations += probe.violations;
    worst = std::max(worst, probe.max_second_difference);
  }
  report(9, "concavity", violations == 0,
         "50 random pairs x 21-point grids: violations = " + std::to_string(violations) +
             ", max second difference = " + fmt(worst) + " (<= 1e-8)");
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  criterion_accuracy();

  const Corpus corpus = build_corpus(200, 4242);
  criterion_fixed_point(corpus);
  criterion_closed_forms(corpus);
  criterion_consistency_chain(corpus);
  criterion_stationarity();
  criterion_waterfilling();
  criterion_optimizer();
  criterion_comparison();
  criterion_concavity();
  criterion_accuracy_trend();

  const double total_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d/10 criteria passed (%.1f s)\n", 10 - g_failures, total_s);
  return g_failures;
}
