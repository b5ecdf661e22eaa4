#include "scnctl/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace scnctl {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" +
                                value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("config: '" + key +
                                "' expects an integer, got '" + value + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("config: '" + key +
                                "' expects an unsigned integer, got '" + value +
                                "'");
  }
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    out.push_back(std::pow(10.0, std::log10(lo) + f * (std::log10(hi) - std::log10(lo))));
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    out.push_back(lo + f * (hi - lo));
  }
  return out;
}

LqrCost diag_cost(std::initializer_list<double> q, double r) {
  LqrCost c;
  c.Q = Vector(Eigen::Map<const Vector>(q.begin(), static_cast<Eigen::Index>(q.size())))
            .asDiagonal();
  c.R = Matrix::Constant(1, 1, r);
  return c;
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kEstimation:
      return "estimation";
    case ScenarioKind::kSmdControl:
      return "smd_control";
    case ScenarioKind::kSilencing:
      return "silencing";
    case ScenarioKind::kRobustnessSweep:
      return "robustness_sweep";
    case ScenarioKind::kCartpole:
      return "cartpole";
    case ScenarioKind::kSparsity:
      return "sparsity";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(std::string_view name) {
  for (auto k : {ScenarioKind::kEstimation, ScenarioKind::kSmdControl,
                 ScenarioKind::kSilencing, ScenarioKind::kRobustnessSweep,
                 ScenarioKind::kCartpole, ScenarioKind::kSparsity}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

Vector ReferenceSchedule::at(double t) const {
  return levels.at(segment(t));
}

std::size_t ReferenceSchedule::segment(double t) const {
  if (levels.empty()) throw std::logic_error("empty reference schedule");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  return static_cast<std::size_t>(std::distance(times.begin(), it) - 1);
}

ReferenceSchedule ReferenceSchedule::stair(Eigen::Index state_dim,
                                           double duration, int steps,
                                           double height, double base) {
  ReferenceSchedule ref;
  for (int i = 0; i <= steps; ++i) {
    ref.times.push_back(duration * i / (steps + 1));
    Vector level = Vector::Zero(state_dim);
    level[0] = base + height * i;
    ref.levels.push_back(level);
  }
  return ref;
}

ReferenceSchedule ReferenceSchedule::constant(const Vector& level) {
  ReferenceSchedule ref;
  ref.times = {0.0};
  ref.levels = {level};
  return ref;
}

std::int64_t Scenario::steps() const {
  return static_cast<std::int64_t>(std::llround(duration / dt));
}

std::vector<SilenceEvent> silencing_blocks(const std::vector<double>& times,
                                           int per_event) {
  std::vector<SilenceEvent> out;
  int next = 0;
  for (double t : times) {
    SilenceEvent ev{t, {}};
    for (int i = 0; i < per_event; ++i) ev.neurons.push_back(next++);
    out.push_back(std::move(ev));
  }
  return out;
}

Scenario default_scenario(ScenarioKind kind) {
  Scenario sc;
  sc.kind = kind;
  switch (kind) {
    case ScenarioKind::kEstimation:
      sc.plant = PlantKind::kSmd;
      sc.smd = {3.0, 5.0, 0.5};
      sc.network = {20, 0.1, 0.1, 0.1, 1e-5};
      sc.disturbance_var = sc.sensor_var = 1e-3;
      sc.dt = 1e-3;
      sc.duration = 50.0;
      sc.record_every = 10;
      sc.initial_state = Vector::Zero(2);
      sc.initial_state[0] = 1.0;
      sc.reference = ReferenceSchedule::constant(Vector::Zero(2));
      sc.artifact_choices = {"initial plant state (1, 0); estimators start at 0"};
      break;
    case ScenarioKind::kSmdControl:
    case ScenarioKind::kSilencing:
      sc.plant = PlantKind::kSmd;
      sc.smd = {20.0, 6.0, 2.0};
      sc.network = {50, 0.1, 0.1, 0.1, 1e-5};
      sc.cost = diag_cost({10.0, 1.0}, 1e-2);
      sc.disturbance_var = sc.sensor_var = 0.1;
      sc.dt = 1e-3;
      sc.duration = 50.0;
      sc.record_every = 10;
      sc.initial_state = Vector::Zero(2);
      sc.reference = ReferenceSchedule::stair(2, sc.duration, 4, 1.0);
      sc.artifact_choices = {"stair reference: 4 steps of 1 m at 10/20/30/40 s"};
      if (kind == ScenarioKind::kSilencing) {
        sc.silencing = silencing_blocks({10.0, 26.6, 43.3}, 15);
        sc.artifact_choices.push_back("silenced neurons chosen in index order");
      }
      break;
    case ScenarioKind::kRobustnessSweep:
      sc.plant = PlantKind::kSmd;
      sc.smd = {3.0, 5.0, 0.5};
      sc.network = {50, 0.1, 0.1, 0.1, 1e-5};
      sc.cost = diag_cost({10.0, 1.0}, 1e-2);
      sc.disturbance_var = 1e-3;
      sc.sensor_var = 1e-3;
      sc.dt = 1e-4;
      sc.duration = 5.0;
      sc.record_every = 100;
      sc.initial_state = Vector::Zero(2);
      sc.reference = ReferenceSchedule::constant(Vector::Zero(2));
      sc.pulse = PulseSchedule{2.5, 0.1, 500.0};
      sc.sweep_noise = logspace(1e-5, 0.1, 10);
      sc.sweep_pulse = linspace(100.0, 900.0, 10);
      sc.artifact_choices = {"constant zero reference", "pulse duration 0.1 s",
                             "10x10 grid"};
      break;
    case ScenarioKind::kCartpole:
      sc.plant = PlantKind::kCartpole;
      sc.cartpole = CartpoleParams{};
      sc.network = {100, 0.01, 0.01, 0.1, 1e-5};
      sc.cost = diag_cost({1.0, 1.0, 10.0, 1.0}, 1e-2);
      sc.disturbance_var = sc.sensor_var = 1e-7;
      sc.dt = 1e-4;
      sc.duration = 50.0;
      sc.record_every = 100;
      sc.initial_state = cartpole_up_state();
      sc.reference = ReferenceSchedule::stair(4, sc.duration, 4, 1.0);
      sc.artifact_choices = {"stair reference: 4 cart steps of 1 m at 10/20/30/40 s"};
      break;
    case ScenarioKind::kSparsity:
      sc.plant = PlantKind::kSmd;
      sc.smd = {20.0, 6.0, 2.0};
      sc.network = {50, 1.0, 1.0, 0.1, 1e-6};
      sc.cost = diag_cost({10.0, 1.0}, 1e-2);
      sc.disturbance_var = sc.sensor_var = 1e-3;
      sc.dt = 1e-4;
      sc.duration = 10.0;
      sc.record_every = 10;
      sc.initial_state = Vector::Zero(2);
      sc.reference = ReferenceSchedule::stair(2, sc.duration, 4, 5.0);
      sc.sparsity_lambdas = {0.0, 1.0, 10.0};
      sc.artifact_choices = {"reference: 4 upward steps of 5 m at 2, 4, 6, 8 s"};
      break;
  }
  return sc;
}

std::vector<std::string> validate(const Scenario& sc) {
  std::vector<std::string> out;
  const Eigen::Index k = sc.state_dim();
  if (!(sc.dt > 0.0)) out.push_back("integration.dt must be positive");
  if (!(sc.duration > 0.0)) out.push_back("integration.duration must be positive");
  if (sc.record_every < 1) out.push_back("integration.record_every must be >= 1");
  if (sc.network.neurons < 1) out.push_back("network.neurons must be >= 1");
  if (!(sc.network.gamma_x > 0.0) || !(sc.network.gamma_z > 0.0))
    out.push_back("network.gamma_x/gamma_z must be positive");
  if (!(sc.network.lambda >= 0.0)) out.push_back("network.lambda must be >= 0");
  if (!(sc.network.voltage_noise >= 0.0))
    out.push_back("network.voltage_noise must be >= 0");
  if (!(sc.disturbance_var >= 0.0)) out.push_back("noise.disturbance must be >= 0");
  if (!(sc.sensor_var > 0.0)) out.push_back("noise.sensor must be positive");
  if (sc.initial_state.size() != k)
    out.push_back("plant.initial_state must have " + std::to_string(k) + " entries");
  if (sc.reference.levels.empty() ||
      sc.reference.levels.size() != sc.reference.times.size()) {
    out.push_back("reference needs one level per time");
  } else {
    for (std::size_t i = 1; i < sc.reference.times.size(); ++i) {
      if (!(sc.reference.times[i] > sc.reference.times[i - 1]))
        out.push_back("reference times must be strictly increasing");
    }
    for (const auto& l : sc.reference.levels) {
      if (l.size() != k) out.push_back("reference level has wrong dimension");
    }
  }
  for (const auto& ev : sc.silencing) {
    for (int id : ev.neurons) {
      if (id < 0 || id >= sc.network.neurons)
        out.push_back("silencing neuron id " + std::to_string(id) + " out of range");
    }
  }
  if (sc.pulse && !(sc.pulse->duration > 0.0))
    out.push_back("pulse.duration must be positive");
  if (sc.kind != ScenarioKind::kEstimation) {
    if (sc.cost.Q.rows() != k || sc.cost.Q.cols() != k)
      out.push_back("cost.Q must be KxK");
    if (sc.cost.R.rows() != 1 || sc.cost.R.cols() != 1 || !(sc.cost.R(0, 0) > 0.0))
      out.push_back("cost.R must be a positive scalar");
  }
  if (sc.kind == ScenarioKind::kRobustnessSweep &&
      (sc.sweep_noise.empty() || sc.sweep_pulse.empty()))
    out.push_back("sweep grids must be nonempty");
  if (sc.kind == ScenarioKind::kSparsity && sc.sparsity_lambdas.empty())
    out.push_back("sparsity.lambdas must be nonempty");
  try {
    if (sc.plant == PlantKind::kSmd) require_valid(sc.smd);
    else require_valid(sc.cartpole);
  } catch (const std::exception& e) {
    out.push_back(e.what());
  }
  return out;
}

void require_valid(const Scenario& sc) {
  const auto problems = validate(sc);
  if (problems.empty()) return;
  std::string msg = "invalid scenario:";
  for (const auto& p : problems) msg += "\n  - " + p;
  throw std::invalid_argument(msg);
}

ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::stringstream ss{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    }
    out[key] = value;
  }
  return out;
}

ConfigMap load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_config(Scenario& sc, const ConfigMap& config) {
  std::vector<double> ref_times, ref_levels, kill_times;
  std::optional<long long> kill_count;
  std::optional<double> stair_height;
  std::optional<long long> stair_steps;
  std::optional<double> stair_base;
  std::vector<double> q_diag;
  std::vector<double> initial;

  for (const auto& [key, value] : config) {
    auto num = [&] { return parse_double(key, value); };
    if (key == "scenario.name") {
      const ScenarioKind k = scenario_kind_from_string(value);
      if (k != sc.kind) {
        throw std::invalid_argument("config: scenario.name '" + value +
                                    "' does not match subcommand scenario '" +
                                    std::string(to_string(sc.kind)) + "'");
      }
    } else if (key == "plant.smd.m") sc.smd.m = num();
    else if (key == "plant.smd.k") sc.smd.k = num();
    else if (key == "plant.smd.c") sc.smd.c = num();
    else if (key == "plant.cartpole.m") sc.cartpole.m = num();
    else if (key == "plant.cartpole.M") sc.cartpole.M = num();
    else if (key == "plant.cartpole.L") sc.cartpole.L = num();
    else if (key == "plant.cartpole.g") sc.cartpole.g = num();
    else if (key == "plant.cartpole.d") sc.cartpole.d = num();
    else if (key == "plant.initial_state") initial = parse_list(key, value);
    else if (key == "network.neurons") sc.network.neurons = static_cast<int>(parse_int(key, value));
    else if (key == "network.gamma_x") sc.network.gamma_x = num();
    else if (key == "network.gamma_z") sc.network.gamma_z = num();
    else if (key == "network.gamma") sc.network.gamma_x = sc.network.gamma_z = num();
    else if (key == "network.lambda") sc.network.lambda = num();
    else if (key == "network.voltage_noise") sc.network.voltage_noise = num();
    else if (key == "cost.Q") q_diag = parse_list(key, value);
    else if (key == "cost.R") sc.cost.R = Matrix::Constant(1, 1, num());
    else if (key == "noise.disturbance") sc.disturbance_var = num();
    else if (key == "noise.sensor") sc.sensor_var = num();
    else if (key == "reference.times") ref_times = parse_list(key, value);
    else if (key == "reference.levels") ref_levels = parse_list(key, value);
    else if (key == "reference.stair_height") stair_height = num();
    else if (key == "reference.stair_steps") stair_steps = parse_int(key, value);
    else if (key == "reference.base") stair_base = num();
    else if (key == "silencing.times") kill_times = parse_list(key, value);
    else if (key == "silencing.count") kill_count = parse_int(key, value);
    else if (key == "pulse.onset") {
      if (!sc.pulse) sc.pulse = PulseSchedule{};
      sc.pulse->onset = num();
    } else if (key == "pulse.duration") {
      if (!sc.pulse) sc.pulse = PulseSchedule{};
      sc.pulse->duration = num();
    } else if (key == "pulse.magnitude") {
      if (!sc.pulse) sc.pulse = PulseSchedule{};
      sc.pulse->magnitude = num();
    } else if (key == "integration.dt") sc.dt = num();
    else if (key == "integration.duration") sc.duration = num();
    else if (key == "integration.record_every") sc.record_every = static_cast<int>(parse_int(key, value));
    else if (key == "seed" || key == "scenario.seed") sc.master_seed = parse_u64(key, value);
    else if (key == "sweep.noise") sc.sweep_noise = parse_list(key, value);
    else if (key == "sweep.pulse") sc.sweep_pulse = parse_list(key, value);
    else if (key == "sparsity.lambdas") sc.sparsity_lambdas = parse_list(key, value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  const Eigen::Index k = sc.state_dim();
  if (!initial.empty()) {
    if (static_cast<Eigen::Index>(initial.size()) != k) {
      throw std::invalid_argument("config: plant.initial_state needs " +
                                  std::to_string(k) + " values");
    }
    sc.initial_state = Eigen::Map<Vector>(initial.data(), k);
  }
  if (!q_diag.empty()) {
    if (static_cast<Eigen::Index>(q_diag.size()) != k) {
      throw std::invalid_argument("config: cost.Q needs " + std::to_string(k) +
                                  " diagonal values");
    }
    sc.cost.Q = Eigen::Map<Vector>(q_diag.data(), k).asDiagonal();
  }
  if (!ref_times.empty() || !ref_levels.empty()) {
    if (ref_times.size() != ref_levels.size()) {
      throw std::invalid_argument(
          "config: reference.times and reference.levels must have equal length");
    }
    ReferenceSchedule ref;
    ref.times = ref_times;
    for (double lv : ref_levels) {
      Vector level = Vector::Zero(k);
      level[0] = lv;
      ref.levels.push_back(level);
    }
    sc.reference = ref;
  } else if (stair_height || stair_steps || stair_base) {
    const auto& old = sc.reference;
    double height = 1.0;
    double steps = 4.0;
    if (old.levels.size() > 1) {
      height = old.levels[1][0] - old.levels[0][0];
      steps = static_cast<double>(old.levels.size() - 1);
    }
    const double base = old.levels.empty() ? 0.0 : old.levels[0][0];
    sc.reference = ReferenceSchedule::stair(
        k, sc.duration, static_cast<int>(stair_steps.value_or(steps)),
        stair_height.value_or(height), stair_base.value_or(base));
  } else if (config.count("integration.duration") && sc.reference.times.size() > 1) {
    // Rescale the default stair to the new run length.
    const double old_end = sc.reference.times.back() * sc.reference.times.size() /
                           (sc.reference.times.size() - 1);
    for (auto& t : sc.reference.times) t *= sc.duration / old_end;
  }
  if (!kill_times.empty() || kill_count) {
    const auto count = static_cast<int>(kill_count.value_or(15));
    if (kill_times.empty()) {
      for (const auto& ev : sc.silencing) kill_times.push_back(ev.time);
    }
    sc.silencing = silencing_blocks(kill_times, count);
  }
}

}  // namespace scnctl
