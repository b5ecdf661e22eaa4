#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <variant>

#include "scnctl/experiments.hpp"
#include "scnctl/output.hpp"
#include "scnctl/riccati.hpp"
#include "scnctl/weights_io.hpp"

namespace py = pybind11;
using namespace scnctl;

namespace {

using Override = std::variant<bool, long long, double, std::string, std::vector<double>>;
using Overrides = std::map<std::string, Override>;

std::string override_text(const Override& v) {
  struct Visitor {
    std::string operator()(bool b) const { return b ? "1" : "0"; }
    std::string operator()(long long i) const { return std::to_string(i); }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(const std::vector<double>& xs) const {
      std::string out;
      for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_double(xs[i]);
      return out;
    }
  };
  return std::visit(Visitor{}, v);
}

Scenario make_scenario(const std::string& name, const Overrides& overrides) {
  Scenario sc = default_scenario(scenario_kind_from_string(name));
  ConfigMap cfg;
  for (const auto& [k, v] : overrides) cfg[k] = override_text(v);
  apply_config(sc, cfg);
  require_valid(sc);
  return sc;
}

Matrix stack(const std::vector<Vector>& rows) {
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

py::dict metrics_dict(const RunMetrics& m) {
  py::dict d;
  d["rmse_vs_oracle"] = m.rmse_vs_oracle;
  d["rmse_vs_reference"] = m.rmse_vs_reference;
  d["mae_vs_reference"] = m.mae_vs_reference;
  d["oracle_rmse_vs_reference"] = m.oracle_rmse_vs_reference;
  d["oracle_mae_vs_reference"] = m.oracle_mae_vs_reference;
  d["rmse_vs_oracle_after_transient"] = m.rmse_vs_oracle_after_transient;
  d["convergence_time"] = m.convergence_time;
  d["max_abs_pole_deviation"] = m.max_abs_pole_deviation;
  d["oracle_max_abs_pole_deviation"] = m.oracle_max_abs_pole_deviation;
  d["spike_count"] = m.spike_count;
  d["spikes_per_second"] = m.spikes_per_second;
  d["max_spikes_per_step"] = m.max_spikes_per_step;
  d["silenced_spike_violations"] = m.silenced_spike_violations;
  d["readout_identity_max_error"] = m.readout_identity_max_error;
  py::list phases;
  for (const auto& p : m.phases) {
    py::dict e;
    e["start"] = p.start;
    e["end"] = p.end;
    e["active_neurons"] = p.active_neurons;
    e["spikes"] = p.spikes;
    e["mae"] = p.mae;
    e["oracle_mae"] = p.oracle_mae;
    phases.append(e);
  }
  d["phases"] = phases;
  return d;
}

py::dict trajectory_dict(const Trajectory& tr) {
  py::dict d;
  d["time"] = Vector(Eigen::Map<const Vector>(tr.time.data(), static_cast<Eigen::Index>(tr.time.size())));
  d["x"] = stack(tr.x);
  d["y"] = stack(tr.y);
  d["x_hat"] = stack(tr.x_hat);
  d["oracle_x_hat"] = stack(tr.oracle_x_hat);
  if (tr.has_control) {
    d["z_hat"] = stack(tr.z_hat);
    d["u"] = stack(tr.u);
    d["reference"] = stack(tr.reference);
    d["oracle_x"] = stack(tr.oracle_x);
    d["oracle_u"] = stack(tr.oracle_u);
  }
  Vector spike_t(static_cast<Eigen::Index>(tr.spikes.size()));
  Eigen::VectorXi spike_n(static_cast<Eigen::Index>(tr.spikes.size()));
  for (std::size_t i = 0; i < tr.spikes.size(); ++i) {
    spike_t[static_cast<Eigen::Index>(i)] = tr.spikes[i].time;
    spike_n[static_cast<Eigen::Index>(i)] = tr.spikes[i].neuron;
  }
  d["spike_times"] = spike_t;
  d["spike_neurons"] = spike_n;
  d["metrics"] = metrics_dict(tr.metrics);
  d["trajectory_csv"] = trajectory_csv(tr);
  d["spikes_csv"] = spikes_csv(tr.spikes);
  return d;
}

Matrix grid(const std::vector<std::vector<double>>& m) {
  Matrix out(static_cast<Eigen::Index>(m.size()), m.empty() ? 0 : static_cast<Eigen::Index>(m[0].size()));
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = m[i][j];
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spike coding network estimation and control";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("scenario_names", [] {
    std::vector<std::string> out;
    for (auto k : {ScenarioKind::kEstimation, ScenarioKind::kSmdControl, ScenarioKind::kSilencing,
                   ScenarioKind::kRobustnessSweep, ScenarioKind::kCartpole, ScenarioKind::kSparsity})
      out.emplace_back(to_string(k));
    return out;
  });

  m.def(
      "run",
      [](const std::string& name, const Overrides& overrides) {
        const Scenario sc = make_scenario(name, overrides);
        Trajectory tr;
        {
          py::gil_scoped_release release;
          tr = run_scenario(sc);
        }
        py::dict d = trajectory_dict(tr);
        d["summary_json"] = summary_json(sc, tr);
        return d;
      },
      py::arg("scenario"), py::arg("overrides") = Overrides{},
      "Run a single-trajectory scenario with `section.key` overrides.");

  m.def(
      "sweep",
      [](const Overrides& overrides, std::optional<std::vector<double>> noise,
         std::optional<std::vector<double>> pulse, unsigned threads) {
        const Scenario sc = make_scenario("robustness_sweep", overrides);
        SweepResult res;
        {
          py::gil_scoped_release release;
          res = run_robustness_sweep(sc, noise.value_or(sc.sweep_noise),
                                     pulse.value_or(sc.sweep_pulse), threads);
        }
        py::dict d;
        d["noise"] = res.noise;
        d["pulse"] = res.pulse;
        d["scn_error"] = grid(res.scn_error);
        d["oracle_error"] = grid(res.oracle_error);
        d["scn_rmse"] = grid(res.scn_rmse);
        d["oracle_rmse"] = grid(res.oracle_rmse);
        d["failures"] = res.failures;
        return d;
      },
      py::arg("overrides") = Overrides{}, py::arg("noise") = py::none(),
      py::arg("pulse") = py::none(), py::arg("threads") = 0u);

  m.def(
      "sparsity",
      [](const Overrides& overrides, std::optional<std::vector<double>> lambdas, unsigned threads) {
        const Scenario sc = make_scenario("sparsity", overrides);
        std::vector<SparsityRun> runs;
        {
          py::gil_scoped_release release;
          runs = run_sparsity(sc, lambdas.value_or(sc.sparsity_lambdas), threads);
        }
        py::list out;
        for (const auto& r : runs) {
          py::dict e;
          e["lambda"] = r.lambda;
          e["spikes"] = r.spikes;
          e["metrics"] = metrics_dict(r.trajectory.metrics);
          out.append(e);
        }
        return out;
      },
      py::arg("overrides") = Overrides{}, py::arg("lambdas") = py::none(), py::arg("threads") = 0u);

  m.def(
      "weights_json",
      [](const std::string& name, const Overrides& overrides) {
        return weights_to_json(compile(make_scenario(name, overrides)).weights);
      },
      py::arg("scenario"), py::arg("overrides") = Overrides{});

  m.def(
      "solve_care",
      [](const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
        return solve_care(A, B, Q, R).P;
      },
      py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("R"));
  m.def(
      "lqr_gain",
      [](const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
        return lqr_gain(A, B, LqrCost{Q, R});
      },
      py::arg("A"), py::arg("B"), py::arg("Q"), py::arg("R"));
  m.def("kalman_gain", &kalman_gain, py::arg("A"), py::arg("C"), py::arg("Sigma_d"),
        py::arg("Sigma_n"));
  m.def("spearman", &spearman);
}
