#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "scnctl/noise.hpp"
#include "scnctl/state_space.hpp"
#include "scnctl/types.hpp"

namespace scnctl {

// K x N decoding weights; every column has Euclidean norm `column_norm`.
// The decoded signal is values * r.
struct DecoderMatrix {
  Matrix values;
  double column_norm = 0.0;

  Eigen::Index dim() const { return values.rows(); }
  Eigen::Index neurons() const { return values.cols(); }
};

// Gaussian entries, each column rescaled to norm `gamma`.
DecoderMatrix sample_decoder(Eigen::Index K, Eigen::Index N, double gamma,
                             std::uint64_t seed);

// Wraps explicit decoder values; throws unless all column norms agree to
// within 1e-12 (relative).
DecoderMatrix make_decoder(const Matrix& values);

enum class NetworkMode {
  kAutoencoder,  // tracks an external signal x from (x, x')
  kAutonomous,   // implements x' = A x
  kEstimator,    // Kalman filter driven by (y, u)
  kController,   // Kalman filter + LQR + reference representation
};

std::string_view to_string(NetworkMode mode);
NetworkMode network_mode_from_string(std::string_view name);

// Complete analytically derived parameter set. Unused parts for a mode are
// empty (size 0) matrices.
struct ScnWeights {
  NetworkMode mode = NetworkMode::kAutonomous;
  double lambda = 0.0;

  DecoderMatrix D_x;
  std::optional<DecoderMatrix> D_z;

  Matrix Omega_f_x;  // -D_x' D_x
  Matrix Omega_f_z;  // -D_z' D_z
  Matrix Omega_s;    // D_x' (A + lambda I) D_x
  Matrix Omega_k;    // D_x' K_f C D_x
  Matrix Omega_c;    // -D_x' B K_c D_x
  Matrix Omega_z;    // D_x' B K_c D_z
  Matrix F_x;        // D_x' (autoencoder input)
  Matrix F_k;        // -D_x' K_f
  Matrix F_i;        // D_x' B
  Matrix F_z;        // D_z'
  Matrix D_u;        // -K_c (D_x - D_z)
  Vector T;

  Eigen::Index neurons() const { return D_x.neurons(); }
  Eigen::Index state_dim() const { return D_x.dim(); }

  // Sum of every slow (rate-driven) connectivity present for the mode.
  Matrix slow_total() const;
  // Sum of every fast (spike-driven) connectivity present for the mode.
  Matrix fast_total() const;
};

ScnWeights build_autoencoder(const DecoderMatrix& D, double lambda);

ScnWeights build_dynamics_network(const Matrix& A, const DecoderMatrix& D,
                                  double lambda);

// K_f uses the convention xhat' = A xhat + B u + K_f (C xhat - y); see
// kalman_gain().
ScnWeights build_estimator(const LinearSystem& sys, const Matrix& K_f,
                           const DecoderMatrix& D_x, double lambda);

ScnWeights build_controller(const LinearSystem& sys, const Matrix& K_f,
                            const Matrix& K_c, const DecoderMatrix& D_x,
                            const DecoderMatrix& D_z, double lambda);

struct Spike {
  double time = 0.0;
  int neuron = 0;
};

struct ScnState {
  Vector v;
  Vector r;
  std::vector<bool> silenced;
  std::vector<double> silenced_at;  // NaN for active neurons
  std::vector<Spike> spike_log;
  std::int64_t steps = 0;

  static ScnState zeros(Eigen::Index N);
  Eigen::Index active_count() const;
};

// Inputs for one integration step. Only the fields used by the network's
// mode are read; the others may stay empty.
struct NetworkInputs {
  Vector y;      // observation (estimator, controller)
  Vector u_ext;  // external control (estimator)
  Vector z;      // reference (controller)
  Vector zdot;   // reference rate (controller)
  Vector x;      // tracked signal (autoencoder)
  Vector xdot;   // tracked signal rate (autoencoder)
};

struct Readout {
  Vector x_hat;
  Vector z_hat;  // controller only
  Vector u;      // controller only
};

Readout decode(const ScnWeights& w, const ScnState& st);

// Bars the given neurons from spiking from `time` on.
void silence(ScnState& st, std::span<const int> neuron_ids, double time);

// Stepping engine: owns the weights, the grouped slow/fast matrices and the
// running state.
//
// One step performs, in order:
//   1. v += dt (-lambda v + W_slow r + input drive) + sqrt(dt) eta_V xi
//   2. r *= (1 - lambda dt)
//   3. greedy spike: among active neurons with v_i > T_i pick the largest
//      v_i - T_i (lowest index on ties), apply its fast column to v and
//      increment r_i.
// At most one neuron spikes per step.
class Network {
 public:
  // `voltage_noise` is the white-noise intensity eta_V of the voltage
  // equation; the per-step standard deviation is eta_V * sqrt(dt).
  Network(ScnWeights weights, double voltage_noise,
          std::uint64_t voltage_seed);

  // Advances one step of length dt; `time` stamps a spike if one occurs.
  // Throws NumericalError if the voltages stop being finite.
  std::optional<int> step(const NetworkInputs& in, double dt, double time);

  void silence(std::span<const int> neuron_ids, double time);
  Readout decode() const { return scnctl::decode(weights_, state_); }

  const ScnWeights& weights() const { return weights_; }
  const ScnState& state() const { return state_; }
  // Direct state access; the cached slow drive is rebuilt on the next step.
  ScnState& mutable_state() {
    slow_stale_ = true;
    return state_;
  }

  // Sets v to the value consistent with zero coding error for the current
  // r and signal (autoencoder only): v = D'(x - D r).
  void prime_autoencoder(const Vector& x);

 private:
  void check_inputs(const NetworkInputs& in) const;
  void refresh_slow_drive();

  ScnWeights weights_;
  Matrix slow_;
  Matrix fast_;
  Vector slow_r_;
  Vector drive_;
  Vector noise_buf_;
  ScnState state_;
  ScalarNoise voltage_noise_;
  bool slow_stale_ = true;
};

}  // namespace scnctl
