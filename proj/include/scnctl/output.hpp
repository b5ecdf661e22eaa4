#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scnctl/experiments.hpp"

namespace scnctl {

// Column order: time, x*, y*, xhat*, zhat*, u*, oracle_x*, oracle_xhat*,
// oracle_u*, z*. Estimation runs share one plant and have no control, so
// they omit zhat, u, oracle_x, oracle_u and z.
std::string trajectory_csv(const Trajectory& tr);
std::vector<std::string> trajectory_columns(const Trajectory& tr);

// time,neuron
std::string spikes_csv(const std::vector<Spike>& spikes);

// Rows are sensor-noise values, columns pulse magnitudes; empty cells mark
// diverged runs.
std::string sweep_matrix_csv(const SweepResult& res,
                             const std::vector<std::vector<double>>& matrix);

std::string summary_json(const Scenario& sc, const Trajectory& tr);
std::string sweep_summary_json(const Scenario& sc, const SweepResult& res);
std::string sparsity_summary_json(const Scenario& sc,
                                  const std::vector<SparsityRun>& runs);

// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace scnctl
