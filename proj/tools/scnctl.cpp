#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "scnctl/experiments.hpp"
#include "scnctl/output.hpp"
#include "scnctl/weights_io.hpp"

namespace fs = std::filesystem;
using namespace scnctl;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<int> neurons;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "key = value config file overriding the defaults")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "master seed");
  cmd->add_option("--out", a.out, "output directory")->capture_default_str();
  cmd->add_option("--dt", a.dt, "integration step (s)");
  cmd->add_option("--duration", a.duration, "simulated time (s)");
  cmd->add_option("--neurons", a.neurons, "network size");
}

// Defaults, then the config file, then command-line flags.
Scenario build_scenario(ScenarioKind kind, const CommonArgs& a) {
  ConfigMap cfg;
  if (!a.config.empty()) cfg = load_config(a.config);
  if (kind == ScenarioKind::kSmdControl) {
    auto it = cfg.find("scenario.name");
    if (it != cfg.end() && it->second == "silencing") kind = ScenarioKind::kSilencing;
  }
  Scenario sc = default_scenario(kind);
  if (a.seed) cfg["seed"] = std::to_string(*a.seed);
  if (a.dt) cfg["integration.dt"] = format_double(*a.dt);
  if (a.duration) cfg["integration.duration"] = format_double(*a.duration);
  if (a.neurons) cfg["network.neurons"] = std::to_string(*a.neurons);
  apply_config(sc, cfg);
  require_valid(sc);
  return sc;
}

void write_run(const fs::path& dir, const Scenario& sc, const Trajectory& tr) {
  fs::create_directories(dir);
  write_text(dir / "trajectory.csv", trajectory_csv(tr));
  write_text(dir / "spikes.csv", spikes_csv(tr.spikes));
  write_text(dir / "summary.json", summary_json(sc, tr));
}

void report(const Scenario& sc, const Trajectory& tr) {
  const RunMetrics& m = tr.metrics;
  std::cout << to_string(sc.kind) << ": " << m.spike_count << " spikes ("
            << m.spikes_per_second << "/s), rmse_vs_oracle " << m.rmse_vs_oracle
            << ", rmse_vs_reference " << m.rmse_vs_reference << "\n";
}

int run_single(ScenarioKind kind, const CommonArgs& a) {
  const Scenario sc = build_scenario(kind, a);
  const Trajectory tr = run_scenario(sc);
  const fs::path dir(a.out);
  write_run(dir, sc, tr);
  export_weights(compile(sc).weights, dir / "weights.json");
  report(sc, tr);
  return 0;
}

int run_sweep(const CommonArgs& a) {
  const Scenario sc = build_scenario(ScenarioKind::kRobustnessSweep, a);
  const SweepResult res =
      run_robustness_sweep(sc, sc.sweep_noise, sc.sweep_pulse, a.threads);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_text(dir / "scn_error.csv", sweep_matrix_csv(res, res.scn_error));
  write_text(dir / "oracle_error.csv", sweep_matrix_csv(res, res.oracle_error));
  write_text(dir / "scn_rmse.csv", sweep_matrix_csv(res, res.scn_rmse));
  write_text(dir / "oracle_rmse.csv", sweep_matrix_csv(res, res.oracle_rmse));
  write_text(dir / "summary.json", sweep_summary_json(sc, res));
  std::cout << "sweep: " << res.noise.size() << "x" << res.pulse.size()
            << " cells, " << res.failures.size() << " diverged\n";
  for (const auto& f : res.failures) std::cerr << "warning: " << f << "\n";
  return 0;
}

int run_sparsity_cmd(const CommonArgs& a) {
  const Scenario sc = build_scenario(ScenarioKind::kSparsity, a);
  const auto runs = run_sparsity(sc, sc.sparsity_lambdas, a.threads);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::string table = "lambda,spike_count,spikes_per_second,mae_vs_reference,oracle_mae_vs_reference\n";
  for (const auto& r : runs) {
    Scenario run = sc;
    run.network.lambda = r.lambda;
    write_run(dir / ("lambda_" + format_double(r.lambda)), run, r.trajectory);
    const RunMetrics& m = r.trajectory.metrics;
    table += format_double(r.lambda) + "," + std::to_string(r.spikes) + "," +
             format_double(m.spikes_per_second) + "," +
             format_double(m.mae_vs_reference) + "," +
             format_double(m.oracle_mae_vs_reference) + "\n";
    std::cout << "lambda " << r.lambda << ": " << r.spikes << " spikes\n";
  }
  write_text(dir / "sparsity.csv", table);
  write_text(dir / "summary.json", sparsity_summary_json(sc, runs));
  return 0;
}

int run_export(const std::string& scenario, const CommonArgs& a) {
  const Scenario sc = build_scenario(scenario_kind_from_string(scenario), a);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  const fs::path path = dir / "weights.json";
  export_weights(compile(sc).weights, path);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spike coding network estimation and control experiments"};
  app.require_subcommand(1);

  CommonArgs est, ctl, sweep, cart, sparse, exp;
  bool silencing = false;
  std::string export_scenario = "smd_control";

  auto* c_est = app.add_subcommand("estimate", "SCN Kalman estimator on the spring-mass-damper");
  add_common(c_est, est);
  auto* c_ctl = app.add_subcommand("control", "SCN LQG control of the spring-mass-damper");
  add_common(c_ctl, ctl);
  c_ctl->add_flag("--silencing", silencing, "kill blocks of neurons during the run");
  auto* c_sweep = app.add_subcommand("sweep", "sensor noise x force pulse robustness grid");
  add_common(c_sweep, sweep);
  c_sweep->add_option("--threads", sweep.threads, "worker threads (0 = all cores)");
  auto* c_cart = app.add_subcommand("cartpole", "SCN control of the nonlinear cartpole");
  add_common(c_cart, cart);
  auto* c_sparse = app.add_subcommand("sparsity", "spike counts for several leak rates");
  add_common(c_sparse, sparse);
  c_sparse->add_option("--threads", sparse.threads, "worker threads (0 = all cores)");
  auto* c_exp = app.add_subcommand("export-weights", "write the network weights of a scenario");
  add_common(c_exp, exp);
  c_exp->add_option("--scenario", export_scenario, "scenario whose network to export")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_est->parsed()) return run_single(ScenarioKind::kEstimation, est);
    if (c_ctl->parsed()) {
      return run_single(silencing ? ScenarioKind::kSilencing : ScenarioKind::kSmdControl, ctl);
    }
    if (c_sweep->parsed()) return run_sweep(sweep);
    if (c_cart->parsed()) return run_single(ScenarioKind::kCartpole, cart);
    if (c_sparse->parsed()) return run_sparsity_cmd(sparse);
    if (c_exp->parsed()) return run_export(export_scenario, exp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
