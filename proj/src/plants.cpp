#include "scnctl/plants.hpp"

#include <cmath>
#include <numbers>

namespace scnctl {

void require_valid(const SmdParams& p) {
  if (!(p.m > 0.0 && p.k > 0.0 && p.c > 0.0)) {
    throw std::invalid_argument("SMD parameters m, k, c must be positive");
  }
}

void require_valid(const CartpoleParams& p) {
  if (!(p.m > 0.0 && p.M > 0.0 && p.L > 0.0)) {
    throw std::invalid_argument("cartpole m, M, L must be positive");
  }
  if (!(p.d >= 0.0)) throw std::invalid_argument("cartpole d must be >= 0");
}

void require_valid(const PulseSchedule& s) {
  if (!(s.duration > 0.0)) {
    throw std::invalid_argument("pulse duration must be positive");
  }
}

Vector smd_dynamics(const SmdParams& p, const Vector& x, double u) {
  if (x.size() != 2) throw DimensionError("smd_dynamics: state must be 2-D");
  Vector rate(2);
  rate << x[1], (-p.k * x[0] - p.c * x[1] + u) / p.m;
  return rate;
}

PlantMatrices smd_linear(const SmdParams& p) {
  PlantMatrices out{Matrix(2, 2), Matrix(2, 1), Matrix(1, 2)};
  out.A << 0.0, 1.0, -p.k / p.m, -p.c / p.m;
  out.B << 0.0, 1.0 / p.m;
  out.C << 1.0, 0.0;
  return out;
}

double smd_energy(const SmdParams& p, const Vector& x) {
  return 0.5 * p.k * x[0] * x[0] + 0.5 * p.m * x[1] * x[1];
}

Vector cartpole_dynamics(const CartpoleParams& p, const Vector& x, double u) {
  if (x.size() != 4) {
    throw DimensionError("cartpole_dynamics: state must be 4-D");
  }
  const double s = std::sin(x[2]);
  const double c = std::cos(x[2]);
  const double m = p.m, M = p.M, L = p.L, g = p.g, d = p.d;
  const double den = m * L * L * (M + m * (1.0 - c * c));
  const double coupling = m * L * x[3] * x[3] * s - d * x[1];
  Vector rate(4);
  rate[0] = x[1];
  rate[1] = (-m * m * L * L * g * c * s + m * L * L * coupling + m * L * L * u) /
            den;
  rate[2] = x[3];
  rate[3] = ((m + M) * m * g * L * s - m * L * c * coupling - m * L * c * u) /
            den;
  return rate;
}

Vector cartpole_up_state() {
  Vector x = Vector::Zero(4);
  x[2] = std::numbers::pi;
  return x;
}

PlantMatrices cartpole_linearize_up(const CartpoleParams& p) {
  const double m = p.m, M = p.M, L = p.L, g = p.g, d = p.d;
  PlantMatrices out{Matrix::Zero(4, 4), Matrix::Zero(4, 1), Matrix::Zero(1, 4)};
  out.A(0, 1) = 1.0;
  out.A(1, 1) = -d / M;
  out.A(1, 2) = -m * g / M;
  out.A(2, 3) = 1.0;
  out.A(3, 1) = -d / (M * L);
  out.A(3, 2) = -(m + M) * g / (M * L);
  out.B(1, 0) = 1.0 / M;
  out.B(3, 0) = 1.0 / (M * L);
  out.C(0, 0) = 1.0;
  return out;
}

double pulse_force(const PulseSchedule& s, double t) {
  return (t >= s.onset && t < s.onset + s.duration) ? s.magnitude : 0.0;
}

}  // namespace scnctl
