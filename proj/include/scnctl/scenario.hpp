#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scnctl/plants.hpp"
#include "scnctl/riccati.hpp"
#include "scnctl/types.hpp"

namespace scnctl {

enum class ScenarioKind {
  kEstimation,
  kSmdControl,
  kSilencing,
  kRobustnessSweep,
  kCartpole,
  kSparsity,
};

std::string_view to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(std::string_view name);

enum class PlantKind { kSmd, kCartpole };

struct NetworkConfig {
  int neurons = 50;
  double gamma_x = 0.1;
  double gamma_z = 0.1;
  double lambda = 0.1;
  double voltage_noise = 1e-5;  // voltage noise intensity (per-step std is this * sqrt(dt))
};

// Piecewise-constant reference in model (deviation) coordinates. Level i
// holds on [times[i], times[i+1]); before times[0] level 0 holds.
struct ReferenceSchedule {
  std::vector<double> times;
  std::vector<Vector> levels;

  Vector at(double t) const;
  // Index of the segment active at t.
  std::size_t segment(double t) const;

  // `steps` equal upward position steps of `height` at duration/(steps+1)
  // intervals, starting from `base`. Only the first state coordinate moves.
  static ReferenceSchedule stair(Eigen::Index state_dim, double duration,
                                 int steps, double height, double base = 0.0);
  static ReferenceSchedule constant(const Vector& level);
};

struct SilenceEvent {
  double time = 0.0;
  std::vector<int> neurons;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::kSmdControl;
  PlantKind plant = PlantKind::kSmd;
  SmdParams smd;
  CartpoleParams cartpole;
  NetworkConfig network;
  LqrCost cost;
  double disturbance_var = 1e-3;  // Sigma_d = disturbance_var * I
  double sensor_var = 1e-3;       // Sigma_n = sensor_var * I
  ReferenceSchedule reference;
  std::vector<SilenceEvent> silencing;
  std::optional<PulseSchedule> pulse;
  double dt = 1e-3;
  double duration = 50.0;
  int record_every = 1;
  std::uint64_t master_seed = 1;
  Vector initial_state;  // true plant state at t = 0 (absolute coordinates)

  // Robustness sweep grids (Sigma_n values, pulse magnitudes).
  std::vector<double> sweep_noise;
  std::vector<double> sweep_pulse;
  // Sparsity leak rates.
  std::vector<double> sparsity_lambdas;

  // Notes on defaults that are artifact choices rather than fixed
  // values; copied into summary.json metadata.
  std::vector<std::string> artifact_choices;

  Eigen::Index state_dim() const { return plant == PlantKind::kSmd ? 2 : 4; }
  std::int64_t steps() const;
};

// Default settings for each experiment.
Scenario default_scenario(ScenarioKind kind);

// Empty iff the scenario is runnable.
std::vector<std::string> validate(const Scenario& sc);
void require_valid(const Scenario& sc);

// Kills `per_event` neurons at each time, in index order.
std::vector<SilenceEvent> silencing_blocks(const std::vector<double>& times,
                                           int per_event);

// Flat key-value config: one `section.key = value` per line, `#` comments,
// list values comma separated.
using ConfigMap = std::map<std::string, std::string>;
ConfigMap parse_config(std::string_view text);
ConfigMap load_config(const std::filesystem::path& path);

// Applies overrides; throws std::invalid_argument naming unknown keys or
// malformed values.
void apply_config(Scenario& sc, const ConfigMap& config);

}  // namespace scnctl
