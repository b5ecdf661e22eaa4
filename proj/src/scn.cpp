#include "scnctl/scn.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace scnctl {

namespace {

constexpr std::int64_t kSlowRefreshInterval = 512;

void require(bool cond, const std::string& msg) {
  if (!cond) throw DimensionError(msg);
}

Vector half_squared_column_norms(const Matrix& D) {
  return 0.5 * D.colwise().squaredNorm().transpose();
}

ScnWeights base_weights(const DecoderMatrix& D, double lambda,
                        NetworkMode mode) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  ScnWeights w;
  w.mode = mode;
  w.lambda = lambda;
  w.D_x = D;
  w.Omega_f_x = -D.values.transpose() * D.values;
  w.T = half_squared_column_norms(D.values);
  return w;
}

Matrix dynamics_term(const Matrix& A, const DecoderMatrix& D, double lambda) {
  const Eigen::Index k = D.dim();
  require(A.rows() == k && A.cols() == k,
          "A must be " + std::to_string(k) + "x" + std::to_string(k) +
              " to match the decoder, got " + shape_str(A));
  return D.values.transpose() * (A + lambda * Matrix::Identity(k, k)) *
         D.values;
}

}  // namespace

std::string_view to_string(NetworkMode mode) {
  switch (mode) {
    case NetworkMode::kAutoencoder:
      return "autoencoder";
    case NetworkMode::kAutonomous:
      return "autonomous";
    case NetworkMode::kEstimator:
      return "estimator";
    case NetworkMode::kController:
      return "controller";
  }
  return "unknown";
}

NetworkMode network_mode_from_string(std::string_view name) {
  if (name == "autoencoder") return NetworkMode::kAutoencoder;
  if (name == "autonomous") return NetworkMode::kAutonomous;
  if (name == "estimator") return NetworkMode::kEstimator;
  if (name == "controller") return NetworkMode::kController;
  throw std::invalid_argument("unknown network mode '" + std::string(name) +
                              "'");
}

DecoderMatrix sample_decoder(Eigen::Index K, Eigen::Index N, double gamma,
                             std::uint64_t seed) {
  if (K < 1 || N < 1) throw std::invalid_argument("decoder needs K, N >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("decoder norm must be > 0");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DecoderMatrix D{Matrix(K, N), gamma};
  for (Eigen::Index j = 0; j < N; ++j) {
    double norm = 0.0;
    while (norm == 0.0) {
      for (Eigen::Index i = 0; i < K; ++i) D.values(i, j) = normal(engine);
      norm = D.values.col(j).norm();
    }
    D.values.col(j) *= gamma / norm;
  }
  return D;
}

DecoderMatrix make_decoder(const Matrix& values) {
  if (values.rows() < 1 || values.cols() < 1) {
    throw std::invalid_argument("decoder must be non-empty");
  }
  const Vector norms = values.colwise().norm().transpose();
  const double gamma = norms[0];
  if (!(gamma > 0.0)) throw std::invalid_argument("decoder column is zero");
  for (Eigen::Index j = 1; j < norms.size(); ++j) {
    if (std::abs(norms[j] - gamma) > 1e-12 * gamma) {
      throw std::invalid_argument("decoder columns must share one norm");
    }
  }
  return DecoderMatrix{values, gamma};
}

Matrix ScnWeights::slow_total() const {
  const Eigen::Index n = neurons();
  Matrix total = Matrix::Zero(n, n);
  for (const Matrix* m : {&Omega_s, &Omega_k, &Omega_c, &Omega_z}) {
    if (m->size() > 0) total += *m;
  }
  return total;
}

Matrix ScnWeights::fast_total() const {
  Matrix total = Omega_f_x;
  if (Omega_f_z.size() > 0) total += Omega_f_z;
  return total;
}

ScnWeights build_autoencoder(const DecoderMatrix& D, double lambda) {
  ScnWeights w = base_weights(D, lambda, NetworkMode::kAutoencoder);
  w.F_x = D.values.transpose();
  return w;
}

ScnWeights build_dynamics_network(const Matrix& A, const DecoderMatrix& D,
                                  double lambda) {
  ScnWeights w = base_weights(D, lambda, NetworkMode::kAutonomous);
  w.Omega_s = dynamics_term(A, D, lambda);
  return w;
}

ScnWeights build_estimator(const LinearSystem& sys, const Matrix& K_f,
                           const DecoderMatrix& D_x, double lambda) {
  const Eigen::Index k = sys.state_dim();
  require(D_x.dim() == k, "D_x must have " + std::to_string(k) + " rows");
  require(sys.B.rows() == k, "B must have K rows");
  require(sys.C.cols() == k, "C must have K columns");
  require(K_f.rows() == k && K_f.cols() == sys.obs_dim(),
          "K_f must be K x Q_obs, got " + shape_str(K_f));
  ScnWeights w = base_weights(D_x, lambda, NetworkMode::kEstimator);
  const Matrix Dt = D_x.values.transpose();
  w.Omega_s = dynamics_term(sys.A, D_x, lambda);
  // K_f (C xhat - y) with xhat = D_x r.
  w.Omega_k = Dt * K_f * sys.C * D_x.values;
  w.F_k = -Dt * K_f;
  w.F_i = Dt * sys.B;
  return w;
}

ScnWeights build_controller(const LinearSystem& sys, const Matrix& K_f,
                            const Matrix& K_c, const DecoderMatrix& D_x,
                            const DecoderMatrix& D_z, double lambda) {
  const Eigen::Index k = sys.state_dim();
  require(D_z.dim() == k && D_z.neurons() == D_x.neurons(),
          "D_z must match D_x in shape");
  require(K_c.rows() == sys.input_dim() && K_c.cols() == k,
          "K_c must be P x K, got " + shape_str(K_c));
  ScnWeights w = build_estimator(sys, K_f, D_x, lambda);
  w.mode = NetworkMode::kController;
  w.F_i.resize(0, 0);
  w.D_z = D_z;
  const Matrix Dxt = D_x.values.transpose();
  const Matrix BK = sys.B * K_c;
  w.Omega_f_z = -D_z.values.transpose() * D_z.values;
  w.Omega_c = -Dxt * BK * D_x.values;
  w.Omega_z = Dxt * BK * D_z.values;
  w.F_z = D_z.values.transpose();
  w.D_u = -K_c * (D_x.values - D_z.values);
  w.T = half_squared_column_norms(D_x.values) +
        half_squared_column_norms(D_z.values);
  return w;
}

ScnState ScnState::zeros(Eigen::Index N) {
  ScnState st;
  st.v = Vector::Zero(N);
  st.r = Vector::Zero(N);
  st.silenced.assign(static_cast<std::size_t>(N), false);
  st.silenced_at.assign(static_cast<std::size_t>(N),
                        std::numeric_limits<double>::quiet_NaN());
  return st;
}

Eigen::Index ScnState::active_count() const {
  Eigen::Index n = 0;
  for (bool s : silenced) n += s ? 0 : 1;
  return n;
}

Readout decode(const ScnWeights& w, const ScnState& st) {
  Readout out;
  out.x_hat = w.D_x.values * st.r;
  if (w.D_z) out.z_hat = w.D_z->values * st.r;
  if (w.D_u.size() > 0) out.u = w.D_u * st.r;
  return out;
}

void silence(ScnState& st, std::span<const int> neuron_ids, double time) {
  const auto n = static_cast<int>(st.silenced.size());
  for (int id : neuron_ids) {
    if (id < 0 || id >= n) {
      throw std::out_of_range("silence: neuron id " + std::to_string(id) +
                              " out of range [0, " + std::to_string(n) + ")");
    }
  }
  for (int id : neuron_ids) {
    const auto i = static_cast<std::size_t>(id);
    if (!st.silenced[i]) {
      st.silenced[i] = true;
      st.silenced_at[i] = time;
    }
  }
}

Network::Network(ScnWeights weights, double voltage_noise_std,
                 std::uint64_t voltage_seed)
    : weights_(std::move(weights)),
      voltage_noise_(voltage_noise_std, voltage_seed, StreamLabel::kVoltage) {
  const Eigen::Index n = weights_.neurons();
  slow_ = weights_.slow_total();
  fast_ = weights_.fast_total();
  state_ = ScnState::zeros(n);
  slow_r_ = Vector::Zero(n);
  drive_ = Vector::Zero(n);
  noise_buf_ = Vector::Zero(n);
}

void Network::check_inputs(const NetworkInputs& in) const {
  const Eigen::Index k = weights_.state_dim();
  switch (weights_.mode) {
    case NetworkMode::kAutoencoder:
      require(in.x.size() == k && in.xdot.size() == k,
              "autoencoder step needs x and xdot of dimension K");
      break;
    case NetworkMode::kAutonomous:
      break;
    case NetworkMode::kEstimator:
      require(in.y.size() == weights_.F_k.cols(),
              "estimator step needs y of the observation dimension");
      require(in.u_ext.size() == weights_.F_i.cols(),
              "estimator step needs u_ext of the input dimension");
      break;
    case NetworkMode::kController:
      require(in.y.size() == weights_.F_k.cols(),
              "controller step needs y of the observation dimension");
      require(in.z.size() == k && in.zdot.size() == k,
              "controller step needs z and zdot of dimension K");
      break;
  }
}

void Network::refresh_slow_drive() { slow_r_.noalias() = slow_ * state_.r; }

std::optional<int> Network::step(const NetworkInputs& in, double dt,
                                 double time) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  check_inputs(in);
  const double lambda = weights_.lambda;
  if (slow_stale_ || state_.steps % kSlowRefreshInterval == 0) {
    refresh_slow_drive();
    slow_stale_ = false;
  }

  drive_ = slow_r_;
  switch (weights_.mode) {
    case NetworkMode::kAutoencoder:
      drive_.noalias() += weights_.F_x * (in.xdot + lambda * in.x);
      break;
    case NetworkMode::kAutonomous:
      break;
    case NetworkMode::kEstimator:
      drive_.noalias() += weights_.F_k * in.y;
      drive_.noalias() += weights_.F_i * in.u_ext;
      break;
    case NetworkMode::kController:
      drive_.noalias() += weights_.F_k * in.y;
      drive_.noalias() += weights_.F_z * (in.zdot + lambda * in.z);
      break;
  }
  Vector& v = state_.v;
  v += dt * (drive_ - lambda * v);
  if (voltage_noise_.stddev() > 0.0) {
    voltage_noise_.fill(noise_buf_);
    v += std::sqrt(dt) * noise_buf_;
  }

  const double decay = 1.0 - lambda * dt;
  state_.r *= decay;
  slow_r_ *= decay;
  ++state_.steps;

  if (!v.allFinite()) {
    std::ostringstream os;
    os << "network diverged at step " << state_.steps << " (t=" << time << ")";
    throw NumericalError(os.str());
  }

  int best = -1;
  double best_margin = 0.0;
  const Vector& T = weights_.T;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (state_.silenced[static_cast<std::size_t>(i)]) continue;
    const double margin = v[i] - T[i];
    if (margin > 0.0 && (best < 0 || margin > best_margin)) {
      best = static_cast<int>(i);
      best_margin = margin;
    }
  }
  if (best < 0) return std::nullopt;

  v += fast_.col(best);
  state_.r[best] += 1.0;
  slow_r_ += slow_.col(best);
  state_.spike_log.push_back(Spike{time, best});
  return best;
}

void Network::silence(std::span<const int> neuron_ids, double time) {
  scnctl::silence(state_, neuron_ids, time);
}

void Network::prime_autoencoder(const Vector& x) {
  const Matrix& D = weights_.D_x.values;
  state_.v = D.transpose() * (x - D * state_.r);
}

}  // namespace scnctl
