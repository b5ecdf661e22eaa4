#include "scnctl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include "scnctl/lqg.hpp"
#include "scnctl/noise.hpp"
#include "scnctl/riccati.hpp"

namespace scnctl {

namespace {

constexpr double kTransient = 5.0;
constexpr double kConvergenceTolerance = 0.25;

using PlantStep =
    std::function<Vector(const Vector& x, double u, const Vector& w)>;

PlantStep make_plant(const Scenario& sc, const CompiledScenario& cs) {
  const double dt = sc.dt;
  if (sc.plant == PlantKind::kSmd) {
    const LinearSystem sys = cs.model;
    return [sys, dt](const Vector& x, double u, const Vector& w) {
      return euler_step(sys, x, Vector::Constant(1, u), dt, w);
    };
  }
  const CartpoleParams p = sc.cartpole;
  return [p, dt](const Vector& x, double u, const Vector& w) -> Vector {
    return x + dt * cartpole_dynamics(p, x, u) + w;
  };
}

// Phase boundaries: reference changes and silencing events inside the run.
std::vector<double> phase_boundaries(const Scenario& sc) {
  std::vector<double> b{0.0};
  for (double t : sc.reference.times) b.push_back(t);
  for (const auto& ev : sc.silencing) b.push_back(ev.time);
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double t : b) {
    if (t < 0.0 || t >= sc.duration) continue;
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  if (out.empty() || out.front() > 0.0) out.insert(out.begin(), 0.0);
  return out;
}

struct RunningError {
  double sum_sq = 0.0;
  double sum_abs = 0.0;
  std::int64_t n = 0;
  void add(double e) {
    sum_sq += e * e;
    sum_abs += std::abs(e);
    ++n;
  }
  double rmse() const { return n ? std::sqrt(sum_sq / n) : 0.0; }
  double mae() const { return n ? sum_abs / n : 0.0; }
};

void finalize_spike_checks(const Scenario& sc, const ScnState& st,
                           RunMetrics& m) {
  m.spike_count = static_cast<std::int64_t>(st.spike_log.size());
  m.spikes_per_second = m.spike_count / sc.duration;
  std::int64_t run = 0;
  double last = std::numeric_limits<double>::quiet_NaN();
  for (const Spike& s : st.spike_log) {
    run = (s.time == last) ? run + 1 : 1;
    last = s.time;
    m.max_spikes_per_step = std::max(m.max_spikes_per_step, run);
    const double killed = st.silenced_at[static_cast<std::size_t>(s.neuron)];
    if (!std::isnan(killed) && s.time >= killed) ++m.silenced_spike_violations;
  }
}

void check_finite(const Vector& x, std::int64_t step, const char* what) {
  if (!x.allFinite()) {
    std::ostringstream os;
    os << what << " diverged at step " << step;
    throw NumericalError(os.str());
  }
}

}  // namespace

CompiledScenario compile(const Scenario& sc) {
  require_valid(sc);
  CompiledScenario cs;
  PlantMatrices pm;
  if (sc.plant == PlantKind::kSmd) {
    pm = smd_linear(sc.smd);
    cs.equilibrium = Vector::Zero(2);
  } else {
    pm = cartpole_linearize_up(sc.cartpole);
    cs.equilibrium = cartpole_up_state();
  }
  const Eigen::Index k = pm.A.rows();
  const Eigen::Index q = pm.C.rows();
  cs.model = LinearSystem{pm.A, pm.B, pm.C,
                          sc.disturbance_var * Matrix::Identity(k, k),
                          sc.sensor_var * Matrix::Identity(q, q)};
  require_valid(cs.model);
  cs.K_f = kalman_gain(cs.model.A, cs.model.C, cs.model.Sigma_d,
                       cs.model.Sigma_n);
  const DecoderMatrix D_x =
      sample_decoder(k, sc.network.neurons, sc.network.gamma_x,
                     stream_seed(sc.master_seed, StreamLabel::kDecoder));
  if (sc.kind == ScenarioKind::kEstimation) {
    cs.weights = build_estimator(cs.model, cs.K_f, D_x, sc.network.lambda);
    return cs;
  }
  cs.K_c = lqr_gain(cs.model.A, cs.model.B, sc.cost);
  const DecoderMatrix D_z =
      sample_decoder(k, sc.network.neurons, sc.network.gamma_z,
                     stream_seed(sc.master_seed, StreamLabel::kDecoderZ));
  cs.weights = build_controller(cs.model, cs.K_f, cs.K_c, D_x, D_z,
                                sc.network.lambda);
  return cs;
}

Trajectory run_estimation(const Scenario& sc) {
  if (sc.kind != ScenarioKind::kEstimation) {
    throw std::invalid_argument("run_estimation needs an estimation scenario");
  }
  const CompiledScenario cs = compile(sc);
  const LinearSystem& model = cs.model;
  const Eigen::Index k = model.state_dim();
  const PlantStep plant = make_plant(sc, cs);

  NoiseSource disturbance(model.Sigma_d,
                          stream_seed(sc.master_seed, StreamLabel::kDisturbance),
                          StreamLabel::kDisturbance);
  NoiseSource sensor(model.Sigma_n,
                     stream_seed(sc.master_seed, StreamLabel::kSensor),
                     StreamLabel::kSensor);
  Network net(cs.weights, sc.network.voltage_noise,
              stream_seed(sc.master_seed, StreamLabel::kVoltage));

  Trajectory tr;
  tr.state_dim = k;
  tr.obs_dim = model.obs_dim();
  tr.has_control = false;

  Vector x = sc.initial_state;
  LqgState kf{Vector::Zero(k), Vector::Zero(model.input_dim())};
  const Vector u_ext = Vector::Zero(model.input_dim());
  NetworkInputs in;
  in.u_ext = u_ext;

  RunningError vs_oracle, vs_true, oracle_vs_true;
  std::vector<RunningError> after_transient(static_cast<std::size_t>(k));
  const std::int64_t steps = sc.steps();
  // Convergence: end of the last 0.5 s window whose RMS position error
  // exceeds kConvergenceTolerance times the initial mismatch.
  const double mismatch =
      std::max(std::abs((sc.initial_state - cs.equilibrium)[0]), 1e-12);
  const auto window = std::max<std::int64_t>(1, std::llround(0.5 / sc.dt));
  double window_sq = 0.0;
  double last_bad_window_end = 0.0;

  for (std::int64_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * sc.dt;
    const Vector dev = x - cs.equilibrium;
    in.y = observe(model, dev, sensor);
    const Vector x_hat = cs.weights.D_x.values * net.state().r;

    if (n % sc.record_every == 0) {
      tr.time.push_back(t);
      tr.x.push_back(x);
      tr.y.push_back(in.y);
      tr.x_hat.push_back(x_hat);
      tr.reference.push_back(Vector::Zero(k));
      tr.oracle_x_hat.push_back(kf.x_hat);
    }
    const double e_pos = x_hat[0] - dev[0];
    vs_oracle.add(x_hat[0] - kf.x_hat[0]);
    vs_true.add(e_pos);
    oracle_vs_true.add(kf.x_hat[0] - dev[0]);
    if (t >= kTransient) {
      for (Eigen::Index i = 0; i < k; ++i) {
        after_transient[static_cast<std::size_t>(i)].add(x_hat[i] - kf.x_hat[i]);
      }
    }
    window_sq += e_pos * e_pos;
    if ((n + 1) % window == 0) {
      if (std::sqrt(window_sq / window) > kConvergenceTolerance * mismatch) {
        last_bad_window_end = (n + 1) * sc.dt;
      }
      window_sq = 0.0;
    }

    net.step(in, sc.dt, t);
    kf = estimator_step(model, cs.K_f, kf, in.y, u_ext, sc.dt);
    const Vector w = disturbance.sample_scaled(sc.dt);
    x = plant(x, 0.0, w);
    check_finite(x, n, "plant");
  }

  RunMetrics& m = tr.metrics;
  m.rmse_vs_oracle = vs_oracle.rmse();
  m.rmse_vs_reference = vs_true.rmse();
  m.mae_vs_reference = vs_true.mae();
  m.oracle_rmse_vs_reference = oracle_vs_true.rmse();
  m.oracle_mae_vs_reference = oracle_vs_true.mae();
  for (const auto& e : after_transient) {
    m.rmse_vs_oracle_after_transient.push_back(e.rmse());
  }
  m.convergence_time = last_bad_window_end;
  finalize_spike_checks(sc, net.state(), m);
  tr.spikes = net.state().spike_log;
  return tr;
}

namespace {

Trajectory run_closed_loop(const Scenario& sc) {
  const CompiledScenario cs = compile(sc);
  const LinearSystem& model = cs.model;
  const Eigen::Index k = model.state_dim();
  const PlantStep plant = make_plant(sc, cs);
  const bool cartpole = sc.plant == PlantKind::kCartpole;

  NoiseSource disturbance(model.Sigma_d,
                          stream_seed(sc.master_seed, StreamLabel::kDisturbance),
                          StreamLabel::kDisturbance);
  NoiseSource sensor(model.Sigma_n,
                     stream_seed(sc.master_seed, StreamLabel::kSensor),
                     StreamLabel::kSensor);
  Network net(cs.weights, sc.network.voltage_noise,
              stream_seed(sc.master_seed, StreamLabel::kVoltage));

  Trajectory tr;
  tr.state_dim = k;
  tr.obs_dim = model.obs_dim();
  tr.has_control = true;

  Vector x = sc.initial_state;
  Vector x_oracle = sc.initial_state;
  LqgState lqg{Vector::Zero(k), Vector::Zero(model.input_dim())};

  std::vector<SilenceEvent> kills = sc.silencing;
  std::stable_sort(kills.begin(), kills.end(),
                   [](const auto& a, const auto& b) { return a.time < b.time; });
  std::size_t next_kill = 0;

  const std::vector<double> bounds = phase_boundaries(sc);
  std::vector<RunningError> phase_err(bounds.size()), phase_oracle(bounds.size());
  std::vector<std::int64_t> phase_spikes(bounds.size(), 0);
  std::vector<int> phase_active(bounds.size(), sc.network.neurons);
  std::size_t phase = 0;

  RunningError scn_err, oracle_err, vs_oracle;
  double identity_err = 0.0;
  double pole_dev = 0.0, oracle_pole_dev = 0.0;
  NetworkInputs in;

  const std::int64_t steps = sc.steps();
  for (std::int64_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * sc.dt;
    while (next_kill < kills.size() && kills[next_kill].time <= t) {
      net.silence(kills[next_kill].neurons, t);
      ++next_kill;
    }
    while (phase + 1 < bounds.size() && bounds[phase + 1] <= t) ++phase;
    phase_active[phase] = static_cast<int>(net.state().active_count());

    const Vector z = sc.reference.at(t);
    // Forward difference: a reference jump enters as a one-step impulse,
    // the Euler image of the delta in z'.
    in.zdot = (sc.reference.at(t + sc.dt) - z) / sc.dt;
    const Vector noise = sensor.sample();
    const Vector dev = x - cs.equilibrium;
    const Vector dev_oracle = x_oracle - cs.equilibrium;
    in.y = observe(model, dev, noise);
    in.z = z;
    const Vector y_oracle = observe(model, dev_oracle, noise);

    const Readout ro = net.decode();
    const Vector u_check = -cs.K_c * (ro.x_hat - ro.z_hat);
    const Vector scale =
        (net.weights().D_u.cwiseAbs() * net.state().r.cwiseAbs()).cwiseMax(1.0);
    identity_err =
        std::max(identity_err, ((ro.u - u_check).cwiseAbs().array() / scale.array()).maxCoeff());

    if (n % sc.record_every == 0) {
      tr.time.push_back(t);
      tr.x.push_back(x);
      tr.y.push_back(in.y);
      tr.x_hat.push_back(ro.x_hat);
      tr.z_hat.push_back(ro.z_hat);
      tr.u.push_back(ro.u);
      tr.reference.push_back(z);
      tr.oracle_x.push_back(x_oracle);
      tr.oracle_x_hat.push_back(lqg.x_hat);
      tr.oracle_u.push_back(-cs.K_c * (lqg.x_hat - z));
    }

    const double e = dev[0] - z[0];
    const double eo = dev_oracle[0] - z[0];
    scn_err.add(e);
    oracle_err.add(eo);
    vs_oracle.add(dev[0] - dev_oracle[0]);
    phase_err[phase].add(e);
    phase_oracle[phase].add(eo);
    if (cartpole) {
      pole_dev = std::max(pole_dev, std::abs(dev[2]));
      oracle_pole_dev = std::max(oracle_pole_dev, std::abs(dev_oracle[2]));
      if (std::abs(dev[2]) > std::numbers::pi / 2 ||
          std::abs(dev_oracle[2]) > std::numbers::pi / 2) {
        std::ostringstream os;
        os << "pole dropped at t=" << t << " ("
           << (std::abs(dev[2]) > std::numbers::pi / 2 ? "SCN" : "ideal")
           << " controller)";
        throw NumericalError(os.str());
      }
    }

    if (net.step(in, sc.dt, t)) ++phase_spikes[phase];
    lqg = lqg_step(model, cs.K_f, cs.K_c, lqg, y_oracle, z, sc.dt);

    const double push = sc.pulse ? pulse_force(*sc.pulse, t) : 0.0;
    const Vector w = disturbance.sample_scaled(sc.dt);
    x = plant(x, ro.u[0] + push, w);
    x_oracle = plant(x_oracle, lqg.u[0] + push, w);
    check_finite(x, n, "SCN-controlled plant");
    check_finite(x_oracle, n, "ideal-controlled plant");
  }

  RunMetrics& m = tr.metrics;
  m.rmse_vs_oracle = vs_oracle.rmse();
  m.rmse_vs_reference = scn_err.rmse();
  m.mae_vs_reference = scn_err.mae();
  m.oracle_rmse_vs_reference = oracle_err.rmse();
  m.oracle_mae_vs_reference = oracle_err.mae();
  m.readout_identity_max_error = identity_err;
  m.max_abs_pole_deviation = pole_dev;
  m.oracle_max_abs_pole_deviation = oracle_pole_dev;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    PhaseMetrics ph;
    ph.start = bounds[i];
    ph.end = i + 1 < bounds.size() ? bounds[i + 1] : sc.duration;
    ph.active_neurons = phase_active[i];
    ph.spikes = phase_spikes[i];
    ph.mae = phase_err[i].mae();
    ph.oracle_mae = phase_oracle[i].mae();
    m.phases.push_back(ph);
  }
  finalize_spike_checks(sc, net.state(), m);
  tr.spikes = net.state().spike_log;
  return tr;
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

Trajectory run_control(const Scenario& sc) {
  if (sc.plant != PlantKind::kSmd || sc.kind == ScenarioKind::kEstimation) {
    throw std::invalid_argument("run_control needs an SMD control scenario");
  }
  return run_closed_loop(sc);
}

Trajectory run_cartpole(const Scenario& sc) {
  if (sc.kind != ScenarioKind::kCartpole || sc.plant != PlantKind::kCartpole) {
    throw std::invalid_argument("run_cartpole needs a cartpole scenario");
  }
  return run_closed_loop(sc);
}

Trajectory run_scenario(const Scenario& sc) {
  switch (sc.kind) {
    case ScenarioKind::kEstimation:
      return run_estimation(sc);
    case ScenarioKind::kSmdControl:
    case ScenarioKind::kSilencing:
    case ScenarioKind::kSparsity:
    case ScenarioKind::kRobustnessSweep:
      return run_control(sc);
    case ScenarioKind::kCartpole:
      return run_cartpole(sc);
  }
  throw std::logic_error("unreachable");
}

SweepResult run_robustness_sweep(const Scenario& sc,
                                 const std::vector<double>& noise_grid,
                                 const std::vector<double>& pulse_grid,
                                 unsigned threads) {
  if (noise_grid.empty() || pulse_grid.empty()) {
    throw std::invalid_argument("sweep grids must be nonempty");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SweepResult res;
  res.noise = noise_grid;
  res.pulse = pulse_grid;
  const auto rows = noise_grid.size(), cols = pulse_grid.size();
  const std::vector<double> blank(cols, nan);
  res.scn_error.assign(rows, blank);
  res.oracle_error.assign(rows, blank);
  res.scn_rmse.assign(rows, blank);
  res.oracle_rmse.assign(rows, blank);
  std::vector<std::string> failures(rows * cols);

  parallel_for(rows * cols, threads, [&](std::size_t idx) {
    const std::size_t i = idx / cols, j = idx % cols;
    Scenario cell = sc;
    cell.sensor_var = noise_grid[i];
    PulseSchedule pulse = sc.pulse.value_or(PulseSchedule{});
    pulse.onset = 0.5 * sc.duration;
    pulse.magnitude = pulse_grid[j];
    cell.pulse = pulse;
    cell.record_every = static_cast<int>(std::min<std::int64_t>(
        cell.steps() + 1, std::numeric_limits<int>::max()));
    try {
      const Trajectory tr = run_closed_loop(cell);
      res.scn_error[i][j] = tr.metrics.mae_vs_reference;
      res.oracle_error[i][j] = tr.metrics.oracle_mae_vs_reference;
      res.scn_rmse[i][j] = tr.metrics.rmse_vs_reference;
      res.oracle_rmse[i][j] = tr.metrics.oracle_rmse_vs_reference;
    } catch (const NumericalError& e) {
      std::ostringstream os;
      os << "cell (noise=" << noise_grid[i] << ", pulse=" << pulse_grid[j]
         << "): " << e.what();
      failures[idx] = os.str();
    }
  });
  for (auto& f : failures) {
    if (!f.empty()) res.failures.push_back(std::move(f));
  }
  return res;
}

std::vector<SparsityRun> run_sparsity(const Scenario& sc,
                                      const std::vector<double>& lambdas,
                                      unsigned threads) {
  if (lambdas.empty()) throw std::invalid_argument("lambdas must be nonempty");
  std::vector<SparsityRun> out(lambdas.size());
  parallel_for(lambdas.size(), threads, [&](std::size_t i) {
    Scenario run = sc;
    run.network.lambda = lambdas[i];
    out[i].lambda = lambdas[i];
    out[i].trajectory = run_control(run);
    out[i].spikes = out[i].trajectory.metrics.spike_count;
  });
  return out;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("spearman needs two samples of equal size >= 2");
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t s = 0; s < idx.size();) {
      std::size_t e = s;
      while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[s]]) ++e;
      const double avg = 0.5 * static_cast<double>(s + e) + 1.0;
      for (std::size_t q = s; q <= e; ++q) r[idx[q]] = avg;
      s = e + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0.0 || db == 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

}  // namespace scnctl
