#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "scnctl/scenario.hpp"
#include "scnctl/scn.hpp"
#include "scnctl/state_space.hpp"

namespace scnctl {

// Error statistics over one phase of a run. Phases are delimited by
// reference changes and silencing events.
struct PhaseMetrics {
  double start = 0.0;
  double end = 0.0;
  int active_neurons = 0;
  std::int64_t spikes = 0;
  double mae = 0.0;         // SCN-controlled plant position vs reference
  double oracle_mae = 0.0;  // ideal-controlled plant position vs reference
};

// Full-resolution metrics accumulated during a run.
struct RunMetrics {
  double rmse_vs_oracle = 0.0;     // position: SCN vs ideal counterpart
  double rmse_vs_reference = 0.0;  // position: SCN quantity vs its target
  double mae_vs_reference = 0.0;
  double oracle_rmse_vs_reference = 0.0;
  double oracle_mae_vs_reference = 0.0;
  // Estimation: RMSE of the SCN decode vs the Kalman estimate after the
  // transient window (first 5 s), per state coordinate.
  std::vector<double> rmse_vs_oracle_after_transient;
  // Estimation: first time after which the SCN position estimate stays
  // within 0.1 of the true position (NaN if never).
  double convergence_time = std::numeric_limits<double>::quiet_NaN();
  double max_abs_pole_deviation = 0.0;  // cartpole, SCN plant
  double oracle_max_abs_pole_deviation = 0.0;
  std::int64_t spike_count = 0;
  double spikes_per_second = 0.0;
  std::vector<PhaseMetrics> phases;

  // Invariant monitors.
  std::int64_t max_spikes_per_step = 0;
  std::int64_t silenced_spike_violations = 0;
  // |D_u r - (-K_c (D_x r - D_z r))| relative to max(1, sum_j |D_u,ij| r_j).
  double readout_identity_max_error = 0.0;
};

// Time-indexed record, decimated by Scenario::record_every. Spikes are kept
// at full resolution with their integration-grid times.
struct Trajectory {
  Eigen::Index state_dim = 0;
  Eigen::Index obs_dim = 0;
  bool has_control = false;

  std::vector<double> time;
  std::vector<Vector> x;             // true plant (SCN loop)
  std::vector<Vector> y;             // observation fed to the SCN
  std::vector<Vector> x_hat;         // SCN decode
  std::vector<Vector> z_hat;         // SCN reference decode (control)
  std::vector<Vector> u;             // SCN control readout (control)
  std::vector<Vector> reference;     // z(t)
  std::vector<Vector> oracle_x;      // plant under the ideal controller
  std::vector<Vector> oracle_x_hat;  // Kalman estimate
  std::vector<Vector> oracle_u;      // ideal control (control)
  std::vector<Spike> spikes;

  RunMetrics metrics;
};

// Everything derived from a scenario before time stepping.
struct CompiledScenario {
  LinearSystem model;   // linear(ized) model in deviation coordinates
  Vector equilibrium;   // absolute state of the model origin
  Matrix K_f;
  Matrix K_c;           // empty for estimation
  ScnWeights weights;
};

CompiledScenario compile(const Scenario& sc);

Trajectory run_estimation(const Scenario& sc);
// SMD control and silencing; also used for each sparsity run.
Trajectory run_control(const Scenario& sc);
Trajectory run_cartpole(const Scenario& sc);
// Dispatches on sc.kind for the single-trajectory experiments.
Trajectory run_scenario(const Scenario& sc);

struct SweepResult {
  std::vector<double> noise;  // rows
  std::vector<double> pulse;  // columns
  // [row][col] time-mean |x1 - z1|; NaN marks a diverged cell.
  std::vector<std::vector<double>> scn_error;
  std::vector<std::vector<double>> oracle_error;
  std::vector<std::vector<double>> scn_rmse;
  std::vector<std::vector<double>> oracle_rmse;
  std::vector<std::string> failures;
};

// Runs every (noise, pulse) cell in parallel on `threads` workers (0 picks
// the hardware concurrency).
SweepResult run_robustness_sweep(const Scenario& sc,
                                 const std::vector<double>& noise_grid,
                                 const std::vector<double>& pulse_grid,
                                 unsigned threads = 0);

struct SparsityRun {
  double lambda = 0.0;
  std::int64_t spikes = 0;
  Trajectory trajectory;
};

std::vector<SparsityRun> run_sparsity(const Scenario& sc,
                                      const std::vector<double>& lambdas,
                                      unsigned threads = 0);

// Spearman rank correlation of two equally sized samples.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace scnctl
