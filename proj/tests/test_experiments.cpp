#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "scnctl/experiments.hpp"
#include "scnctl/output.hpp"

using namespace scnctl;

namespace {

Scenario shortened(ScenarioKind kind, double duration) {
  Scenario sc = default_scenario(kind);
  std::ostringstream cfg;
  cfg << "integration.duration = " << duration;
  apply_config(sc, parse_config(cfg.str()));
  return sc;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("runs replay exactly under a fixed seed and differ across seeds") {
  const Scenario sc = shortened(ScenarioKind::kSmdControl, 3.0);
  const Trajectory a = run_scenario(sc), b = run_scenario(sc);
  CHECK(trajectory_csv(a) == trajectory_csv(b));
  CHECK(spikes_csv(a.spikes) == spikes_csv(b.spikes));
  CHECK(summary_json(sc, a) == summary_json(sc, b));

  Scenario other = sc;
  other.master_seed = 2;
  CHECK(trajectory_csv(run_scenario(other)) != trajectory_csv(a));
}

TEST_CASE("spike raster integrity") {
  for (auto kind : {ScenarioKind::kEstimation, ScenarioKind::kSmdControl}) {
    const Scenario sc = shortened(kind, 4.0);
    const Trajectory tr = run_scenario(sc);
    CHECK(tr.metrics.spike_count == static_cast<std::int64_t>(tr.spikes.size()));
    CHECK(tr.metrics.max_spikes_per_step <= 1);
    CHECK(tr.metrics.readout_identity_max_error < 1e-9);
    std::set<double> times;
    for (std::size_t i = 0; i < tr.spikes.size(); ++i) {
      CHECK(tr.spikes[i].neuron >= 0);
      CHECK(tr.spikes[i].neuron < sc.network.neurons);
      if (i) CHECK(tr.spikes[i].time > tr.spikes[i - 1].time);
    }
    CHECK(tr.time.size() == static_cast<std::size_t>(sc.steps() / sc.record_every));
  }
}

TEST_CASE("silenced neurons never spike after their silencing time") {
  Scenario sc = default_scenario(ScenarioKind::kSilencing);
  apply_config(sc, parse_config("integration.duration = 6\nsilencing.times = 1, 2, 3"));
  const Trajectory tr = run_scenario(sc);
  CHECK(tr.metrics.silenced_spike_violations == 0);
  for (const Spike& s : tr.spikes) {
    for (const SilenceEvent& ev : sc.silencing) {
      if (s.time >= ev.time) {
        for (int id : ev.neurons) CHECK(s.neuron != id);
      }
    }
  }
  REQUIRE(tr.metrics.phases.size() >= 4);
  CHECK(tr.metrics.phases.back().active_neurons == 5);
}

TEST_CASE("trajectory CSV columns") {
  const Trajectory est = run_scenario(shortened(ScenarioKind::kEstimation, 0.5));
  CHECK(first_line(trajectory_csv(est)) == "time,x1,x2,y1,xhat1,xhat2,oracle_xhat1,oracle_xhat2");
  const Trajectory ctl = run_scenario(shortened(ScenarioKind::kSmdControl, 0.5));
  const std::string csv = trajectory_csv(ctl);
  CHECK(first_line(csv) ==
        "time,x1,x2,y1,xhat1,xhat2,zhat1,zhat2,u1,oracle_x1,oracle_x2,oracle_xhat1,"
        "oracle_xhat2,oracle_u1,z1,z2");
  CHECK(count_lines(csv) == ctl.time.size() + 1);
  CHECK(first_line(spikes_csv(ctl.spikes)) == "time,neuron");
}

TEST_CASE("sweep result shape and CSV matrix layout") {
  Scenario sc = default_scenario(ScenarioKind::kRobustnessSweep);
  apply_config(sc, parse_config("integration.duration = 0.5\npulse.onset = 0.2"));
  const std::vector<double> noise{1e-4, 1e-2}, pulse{100, 500, 900};
  const SweepResult res = run_robustness_sweep(sc, noise, pulse, 2);
  REQUIRE(res.scn_error.size() == 2);
  REQUIRE(res.oracle_rmse.size() == 2);
  CHECK(res.scn_error[0].size() == 3);
  CHECK(res.failures.empty());
  const std::string csv = sweep_matrix_csv(res, res.scn_error);
  CHECK(first_line(csv) == "sensor_noise,100,500,900");
  CHECK(count_lines(csv) == 3);
  const SweepResult again = run_robustness_sweep(sc, noise, pulse, 1);
  CHECK(again.scn_error == res.scn_error);
}

TEST_CASE("spearman rank correlation") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 2, 3, 4, 5}, {1, 4, 9, 16, 25}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5));
  CHECK_THROWS(spearman({1, 2}, {1, 2, 3}));
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1e-300, 123456.789, -2.5, 1.0 / 3.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(3.0) == "3");
}

TEST_CASE("summary JSON writes NaN as null") {
  Scenario sc = shortened(ScenarioKind::kEstimation, 0.5);
  Trajectory tr = run_scenario(sc);
  tr.metrics.rmse_vs_oracle = std::nan("");
  CHECK(summary_json(sc, tr).find("\"rmse_vs_oracle\": null") != std::string::npos);
}
