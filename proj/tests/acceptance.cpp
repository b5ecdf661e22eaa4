#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "scnctl/experiments.hpp"
#include "scnctl/output.hpp"
#include "scnctl/riccati.hpp"

using namespace scnctl;

namespace {

// Pinned tolerances.
constexpr double kCareResidual = 1e-8;
constexpr double kScalarRoot = 1e-10;
constexpr double kEstimationRmse = 0.05;
constexpr double kTransient = 5.0;
constexpr double kConvergence = 5.0;
constexpr double kControlRelative = 0.25;
constexpr int kControlSeeds = 10;
constexpr double kSilencingFactor = 2.0;
constexpr double kSecondKillHorizon = 43.3;
constexpr double kPoleBand = 0.2;
constexpr double kStairFraction = 0.10;
constexpr double kSweepRelative = 0.25;
constexpr double kSweepNoiseCap = 0.01;
constexpr double kSweepSpearman = 0.9;
constexpr double kSparsityFactor = 3.0;
constexpr double kReadoutIdentity = 1e-12;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Invariant monitors collected from every scenario run for the mechanics
// criterion.
struct InvariantLog {
  std::int64_t max_spikes_per_step = 0;
  std::int64_t silenced_violations = 0;
  double readout_identity = 0.0;
  int runs = 0;

  void add(const Trajectory& tr) {
    const RunMetrics& m = tr.metrics;
    max_spikes_per_step = std::max(max_spikes_per_step, m.max_spikes_per_step);
    silenced_violations += m.silenced_spike_violations;
    readout_identity = std::max(readout_identity, m.readout_identity_max_error);
    ++runs;
  }
};

InvariantLog g_invariants;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double care_residual_of(const Matrix& A, const Matrix& B, const LqrCost& cost) {
  const CareSolution sol = solve_care(A, B, cost.Q, cost.R);
  return care_residual(A, B, cost.Q, cost.R, sol.P);
}

Outcome riccati_correctness() {
  Outcome out;
  double worst = 0.0;
  for (auto kind : {ScenarioKind::kSmdControl, ScenarioKind::kCartpole}) {
    const Scenario sc = default_scenario(kind);
    const CompiledScenario cs = compile(sc);
    const LinearSystem& m = cs.model;
    worst = std::max(worst, care_residual_of(m.A, m.B, sc.cost));
    const CareSolution filt = solve_filter_care(m.A, m.C, m.Sigma_d, m.Sigma_n);
    worst = std::max(worst, filt.residual_norm);
    if (!is_hurwitz(m.A - m.B * cs.K_c) || !is_hurwitz(m.A + cs.K_f * m.C)) {
      out.pass = false;
      out.detail += std::string(to_string(kind)) + " closed loop not stable; ";
    }
  }
  // Scalar CARE 2 a p - p^2 b^2 / r + q = 0 has root r (a + sqrt(a^2 + b^2 q / r)) / b^2.
  double scalar_err = 0.0;
  for (double a : {-2.0, 0.0, 1.0, 3.5}) {
    for (double q : {0.1, 1.0, 10.0}) {
      const double b = 1.5, r = 0.7;
      const double exact = r * (a + std::sqrt(a * a + b * b * q / r)) / (b * b);
      const CareSolution sol = solve_care(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b),
                                          Matrix::Constant(1, 1, q), Matrix::Constant(1, 1, r));
      scalar_err = std::max(scalar_err, std::abs(sol.P(0, 0) - exact) / std::max(1.0, exact));
    }
  }
  out.pass = out.pass && worst < kCareResidual && scalar_err < kScalarRoot;
  out.detail += "max CARE residual " + fmt("%.2e", worst) + ", scalar root error " +
                fmt("%.2e", scalar_err);
  return out;
}

Outcome coding_soundness() {
  const double gamma = 0.1, dt = 1e-3, w = 2.0;
  auto signal = [&](double t) { return Vector{{std::sin(w * t), 1.0 - std::cos(0.5 * w * t)}}; };
  const DecoderMatrix D = sample_decoder(2, 20, gamma, 1);
  Network net(build_autoencoder(D, 0.1), 0.0, 1);
  bool spiked = false;
  double worst = 0.0;
  std::int64_t non_improving = 0, spikes = 0;
  for (int i = 0; i < 20000; ++i) {
    const double t = i * dt;
    const Vector x = signal(t), x1 = signal(t + dt);
    NetworkInputs in;
    in.x = x;
    in.xdot = (x1 - x) / dt;
    const Vector r_before = net.state().r * (1 - 0.1 * dt);
    if (net.step(in, dt, t)) {
      spiked = true;
      ++spikes;
      const double before = (x1 - D.values * r_before).norm();
      const double after = (x1 - D.values * net.state().r).norm();
      if (!(after < before)) ++non_improving;
    }
    if (spiked) worst = std::max(worst, (x1 - net.decode().x_hat).norm());
  }
  Outcome out;
  out.pass = spiked && worst <= gamma && non_improving == 0;
  out.detail = "max error after first spike " + fmt("%.4f", worst) + " (gamma 0.1), " +
               std::to_string(non_improving) + " of " + std::to_string(spikes) +
               " spikes failed to reduce the error";
  return out;
}

Outcome estimation() {
  const Scenario sc = default_scenario(ScenarioKind::kEstimation);
  const Trajectory tr = run_scenario(sc);
  g_invariants.add(tr);
  const RunMetrics& m = tr.metrics;
  const double rmse = m.rmse_vs_oracle_after_transient.at(0);
  Outcome out;
  out.pass = rmse < kEstimationRmse && m.convergence_time <= kConvergence;
  out.detail = "position RMSE vs Kalman after " + fmt("%.0f", kTransient) + " s " +
               fmt("%.4f", rmse) + ", converged at " + fmt("%.2f", m.convergence_time) + " s";
  return out;
}

Outcome controller_equivalence() {
  std::vector<std::future<Trajectory>> runs;
  for (int seed = 1; seed <= kControlSeeds; ++seed) {
    runs.push_back(std::async(std::launch::async, [seed] {
      Scenario sc = default_scenario(ScenarioKind::kSmdControl);
      sc.master_seed = static_cast<std::uint64_t>(seed);
      return run_scenario(sc);
    }));
  }
  Outcome out;
  double worst = 0.0;
  for (auto& f : runs) {
    const Trajectory tr = f.get();
    g_invariants.add(tr);
    const double rel = std::abs(tr.metrics.mae_vs_reference - tr.metrics.oracle_mae_vs_reference) /
                       tr.metrics.oracle_mae_vs_reference;
    worst = std::max(worst, rel);
  }
  out.pass = worst < kControlRelative;
  out.detail = "worst relative MAE gap over " + std::to_string(kControlSeeds) + " seeds " +
               fmt("%.4f", worst);
  return out;
}

double mae_between(const Trajectory& tr, double from, double to) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < tr.time.size(); ++i) {
    if (tr.time[i] < from || tr.time[i] >= to) continue;
    acc += std::abs(tr.x[i][0] - tr.reference[i][0]);
    ++n;
  }
  return n ? acc / static_cast<double>(n) : std::nan("");
}

Trajectory g_silencing_run;

Outcome silencing_robustness() {
  const Scenario killed = default_scenario(ScenarioKind::kSilencing);
  Scenario intact = default_scenario(ScenarioKind::kSmdControl);
  intact.master_seed = killed.master_seed;
  auto a = std::async(std::launch::async, [&] { return run_scenario(killed); });
  const Trajectory base = run_scenario(intact);
  g_silencing_run = a.get();
  g_invariants.add(base);
  g_invariants.add(g_silencing_run);
  const double with = mae_between(g_silencing_run, 0.0, kSecondKillHorizon);
  const double without = mae_between(base, 0.0, kSecondKillHorizon);
  const double late_with = mae_between(g_silencing_run, kSecondKillHorizon, killed.duration);
  const double late_without = mae_between(base, kSecondKillHorizon, killed.duration);
  Outcome out;
  out.pass = with < kSilencingFactor * without;
  out.detail = "MAE to 43.3 s " + fmt("%.4f", with) + " vs intact " + fmt("%.4f", without) +
               "; after last kill (not asserted) " + fmt("%.4f", late_with) + " vs " +
               fmt("%.4f", late_without);
  return out;
}

Outcome cartpole() {
  const Scenario sc = default_scenario(ScenarioKind::kCartpole);
  const Trajectory tr = run_scenario(sc);
  g_invariants.add(tr);
  const ReferenceSchedule& ref = sc.reference;
  int reached = 0;
  const int levels = static_cast<int>(ref.levels.size());
  for (int s = 0; s < levels; ++s) {
    const double step = s == 0 ? ref.levels[1][0] - ref.levels[0][0]
                               : ref.levels[s][0] - ref.levels[s - 1][0];
    const double end = s + 1 < levels ? ref.times[s + 1] : sc.duration + 1.0;
    for (std::size_t i = 0; i < tr.time.size(); ++i) {
      if (tr.time[i] < ref.times[s] || tr.time[i] >= end) continue;
      if (std::abs(tr.x[i][0] - ref.levels[s][0]) <= kStairFraction * std::abs(step)) {
        ++reached;
        break;
      }
    }
  }
  Outcome out;
  out.pass = tr.metrics.max_abs_pole_deviation < kPoleBand && reached == levels;
  out.detail = "max pole deviation " + fmt("%.4f", tr.metrics.max_abs_pole_deviation) +
               " rad, stair levels reached " + std::to_string(reached) + "/" +
               std::to_string(levels);
  return out;
}

Outcome robustness_sweep() {
  const Scenario sc = default_scenario(ScenarioKind::kRobustnessSweep);
  const std::vector<double> noise{1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  const std::vector<double> pulse{100, 300, 500, 700, 900};
  const SweepResult res = run_robustness_sweep(sc, noise, pulse);
  Outcome out;
  double worst_gap = 0.0;
  for (std::size_t i = 0; i < noise.size(); ++i) {
    if (noise[i] > kSweepNoiseCap) continue;
    for (std::size_t j = 0; j < pulse.size(); ++j) {
      const double gap = std::abs(res.scn_error[i][j] - res.oracle_error[i][j]) / res.oracle_error[i][j];
      worst_gap = std::isnan(gap) ? INFINITY : std::max(worst_gap, gap);
    }
  }
  double min_rho = 1.0;
  for (const auto* mat : {&res.scn_error, &res.oracle_error}) {
    for (std::size_t i = 0; i < noise.size(); ++i) min_rho = std::min(min_rho, spearman(pulse, (*mat)[i]));
    for (std::size_t j = 0; j < pulse.size(); ++j) {
      std::vector<double> col;
      for (std::size_t i = 0; i < noise.size(); ++i) col.push_back((*mat)[i][j]);
      min_rho = std::min(min_rho, spearman(noise, col));
    }
  }
  out.pass = res.failures.empty() && worst_gap < kSweepRelative && min_rho > kSweepSpearman;
  out.detail = "worst relative gap (noise <= 0.01) " + fmt("%.4f", worst_gap) +
               ", min Spearman " + fmt("%.3f", min_rho) + ", " +
               std::to_string(res.failures.size()) + " diverged cells";
  return out;
}

Outcome sparsity() {
  const Scenario sc = default_scenario(ScenarioKind::kSparsity);
  const auto runs = run_sparsity(sc, {0.0, 1.0, 10.0});
  const double target[] = {163, 358, 2381};
  Outcome out;
  out.pass = runs[0].spikes < runs[1].spikes && runs[1].spikes < runs[2].spikes;
  out.detail = "spikes";
  for (std::size_t i = 0; i < 3; ++i) {
    g_invariants.add(runs[i].trajectory);
    const double ratio = static_cast<double>(runs[i].spikes) / target[i];
    out.pass = out.pass && ratio <= kSparsityFactor && ratio >= 1.0 / kSparsityFactor;
    out.detail += " " + std::to_string(runs[i].spikes);
  }
  out.detail += " for leak 0/1/10 (target 163/358/2381)";
  return out;
}

Outcome mechanics() {
  const Scenario sc = default_scenario(ScenarioKind::kSilencing);
  const Trajectory replay = run_scenario(sc);
  const bool identical = trajectory_csv(replay) == trajectory_csv(g_silencing_run) &&
                         spikes_csv(replay.spikes) == spikes_csv(g_silencing_run.spikes);
  const InvariantLog& inv = g_invariants;
  Outcome out;
  out.pass = inv.max_spikes_per_step <= 1 && inv.silenced_violations == 0 &&
             inv.readout_identity <= kReadoutIdentity && identical;
  out.detail = std::to_string(inv.runs) + " runs: max spikes per step " +
               std::to_string(inv.max_spikes_per_step) + ", silenced violations " +
               std::to_string(inv.silenced_violations) + ", readout identity error " +
               fmt("%.2e", inv.readout_identity) + ", replay " +
               (identical ? "identical" : "DIFFERS");
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"A1 riccati correctness", riccati_correctness},
      {"A2 coding soundness", coding_soundness},
      {"A3 estimation", estimation},
      {"A4 controller equivalence", controller_equivalence},
      {"A5 silencing robustness", silencing_robustness},
      {"A6 cartpole", cartpole},
      {"A7 robustness sweep", robustness_sweep},
      {"A8 sparsity trend", sparsity},
      {"A9 mechanics invariants", mechanics},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
