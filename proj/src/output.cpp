#include "scnctl/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scnctl {

namespace {

using ordered_json = nlohmann::ordered_json;

void append_numbered(std::vector<std::string>& cols, const std::string& stem,
                     Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) cols.push_back(stem + std::to_string(i + 1));
}

void append_row(std::string& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += ',';
    out += format_double(v[i]);
  }
}

ordered_json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json json_matrix(const std::vector<std::vector<double>>& m) {
  ordered_json out = ordered_json::array();
  for (const auto& row : m) {
    ordered_json r = ordered_json::array();
    for (double v : row) r.push_back(json_number(v));
    out.push_back(r);
  }
  return out;
}

ordered_json scenario_json(const Scenario& sc) {
  ordered_json s;
  s["name"] = std::string(to_string(sc.kind));
  s["seed"] = sc.master_seed;
  s["plant"] = sc.plant == PlantKind::kSmd ? "smd" : "cartpole";
  s["dt"] = sc.dt;
  s["duration"] = sc.duration;
  s["steps"] = sc.steps();
  s["neurons"] = sc.network.neurons;
  s["gamma_x"] = sc.network.gamma_x;
  s["gamma_z"] = sc.network.gamma_z;
  s["lambda"] = sc.network.lambda;
  s["voltage_noise"] = sc.network.voltage_noise;
  s["disturbance_var"] = sc.disturbance_var;
  s["sensor_var"] = sc.sensor_var;
  ordered_json kills = ordered_json::array();
  for (const auto& ev : sc.silencing) {
    kills.push_back({{"time", ev.time}, {"neurons", ev.neurons}});
  }
  s["silencing"] = kills;
  if (sc.pulse) {
    s["pulse"] = {{"onset", sc.pulse->onset},
                  {"duration", sc.pulse->duration},
                  {"magnitude", sc.pulse->magnitude}};
  }
  return s;
}

ordered_json metrics_json(const RunMetrics& m) {
  ordered_json j;
  j["rmse_vs_oracle"] = json_number(m.rmse_vs_oracle);
  j["rmse_vs_reference"] = json_number(m.rmse_vs_reference);
  j["mae_vs_reference"] = json_number(m.mae_vs_reference);
  j["oracle_rmse_vs_reference"] = json_number(m.oracle_rmse_vs_reference);
  j["oracle_mae_vs_reference"] = json_number(m.oracle_mae_vs_reference);
  if (!m.rmse_vs_oracle_after_transient.empty()) {
    ordered_json a = ordered_json::array();
    for (double v : m.rmse_vs_oracle_after_transient) a.push_back(json_number(v));
    j["rmse_vs_oracle_after_transient"] = a;
    j["convergence_time"] = json_number(m.convergence_time);
  }
  j["max_abs_pole_deviation"] = m.max_abs_pole_deviation;
  j["oracle_max_abs_pole_deviation"] = m.oracle_max_abs_pole_deviation;
  j["spike_count"] = m.spike_count;
  j["spikes_per_second"] = m.spikes_per_second;
  ordered_json phases = ordered_json::array();
  for (const auto& p : m.phases) {
    phases.push_back({{"start", p.start},
                      {"end", p.end},
                      {"active_neurons", p.active_neurons},
                      {"spikes", p.spikes},
                      {"mae", json_number(p.mae)},
                      {"oracle_mae", json_number(p.oracle_mae)}});
  }
  j["phases"] = phases;
  j["invariants"] = {{"max_spikes_per_step", m.max_spikes_per_step},
                     {"silenced_spike_violations", m.silenced_spike_violations},
                     {"readout_identity_max_error", m.readout_identity_max_error}};
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

std::vector<std::string> trajectory_columns(const Trajectory& tr) {
  std::vector<std::string> cols{"time"};
  const Eigen::Index k = tr.state_dim;
  const Eigen::Index u_dim = tr.u.empty() ? 0 : tr.u.front().size();
  append_numbered(cols, "x", k);
  append_numbered(cols, "y", tr.obs_dim);
  append_numbered(cols, "xhat", k);
  if (tr.has_control) {
    append_numbered(cols, "zhat", k);
    append_numbered(cols, "u", u_dim);
    append_numbered(cols, "oracle_x", k);
  }
  append_numbered(cols, "oracle_xhat", k);
  if (tr.has_control) {
    append_numbered(cols, "oracle_u", u_dim);
    append_numbered(cols, "z", k);
  }
  return cols;
}

std::string trajectory_csv(const Trajectory& tr) {
  std::string out;
  const auto cols = trajectory_columns(tr);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (std::size_t r = 0; r < tr.time.size(); ++r) {
    out += format_double(tr.time[r]);
    append_row(out, tr.x[r]);
    append_row(out, tr.y[r]);
    append_row(out, tr.x_hat[r]);
    if (tr.has_control) {
      append_row(out, tr.z_hat[r]);
      append_row(out, tr.u[r]);
      append_row(out, tr.oracle_x[r]);
    }
    append_row(out, tr.oracle_x_hat[r]);
    if (tr.has_control) {
      append_row(out, tr.oracle_u[r]);
      append_row(out, tr.reference[r]);
    }
    out += '\n';
  }
  return out;
}

std::string spikes_csv(const std::vector<Spike>& spikes) {
  std::string out = "time,neuron\n";
  for (const Spike& s : spikes) {
    out += format_double(s.time);
    out += ',';
    out += std::to_string(s.neuron);
    out += '\n';
  }
  return out;
}

std::string sweep_matrix_csv(const SweepResult& res,
                             const std::vector<std::vector<double>>& matrix) {
  std::string out = "sensor_noise";
  for (double p : res.pulse) out += "," + format_double(p);
  out += '\n';
  for (std::size_t i = 0; i < res.noise.size(); ++i) {
    out += format_double(res.noise[i]);
    for (std::size_t j = 0; j < res.pulse.size(); ++j) {
      out += ',';
      const double v = matrix.at(i).at(j);
      if (std::isfinite(v)) out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string summary_json(const Scenario& sc, const Trajectory& tr) {
  ordered_json j;
  j["scenario"] = scenario_json(sc);
  j["metrics"] = metrics_json(tr.metrics);
  j["artifact_choices"] = sc.artifact_choices;
  return j.dump(2) + "\n";
}

std::string sweep_summary_json(const Scenario& sc, const SweepResult& res) {
  ordered_json j;
  j["scenario"] = scenario_json(sc);
  j["sensor_noise"] = res.noise;
  j["pulse"] = res.pulse;
  j["metric"] = "time-mean |x1 - z1| over the run";
  j["scn_error"] = json_matrix(res.scn_error);
  j["oracle_error"] = json_matrix(res.oracle_error);
  j["scn_rmse"] = json_matrix(res.scn_rmse);
  j["oracle_rmse"] = json_matrix(res.oracle_rmse);
  j["failures"] = res.failures;
  j["artifact_choices"] = sc.artifact_choices;
  return j.dump(2) + "\n";
}

std::string sparsity_summary_json(const Scenario& sc,
                                  const std::vector<SparsityRun>& runs) {
  ordered_json j;
  j["scenario"] = scenario_json(sc);
  ordered_json arr = ordered_json::array();
  for (const auto& r : runs) {
    ordered_json e;
    e["lambda"] = r.lambda;
    e["spike_count"] = r.spikes;
    e["spikes_per_second"] = r.trajectory.metrics.spikes_per_second;
    e["metrics"] = metrics_json(r.trajectory.metrics);
    arr.push_back(e);
  }
  j["runs"] = arr;
  j["artifact_choices"] = sc.artifact_choices;
  return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace scnctl
