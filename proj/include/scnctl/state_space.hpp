#pragma once

#include <functional>
#include <string>
#include <vector>

#include "scnctl/noise.hpp"
#include "scnctl/types.hpp"

namespace scnctl {

// Continuous-time plant  x' = A x + B u + eta_d,  y = C x + eta_n.
struct LinearSystem {
  Matrix A;        // K x K
  Matrix B;        // K x P
  Matrix C;        // Q_obs x K
  Matrix Sigma_d;  // K x K disturbance intensity
  Matrix Sigma_n;  // Q_obs x Q_obs sensor noise covariance

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }
  Eigen::Index obs_dim() const { return C.rows(); }
};

// Returns one message per violated invariant; empty means valid.
std::vector<std::string> validate(const LinearSystem& sys);

// Throws DimensionError / std::invalid_argument on the first violation.
void require_valid(const LinearSystem& sys);

// x + dt (A x + B u) + w with w ~ N(0, dt Sigma_d) drawn from `disturbance`.
Vector euler_step(const LinearSystem& sys, const Vector& x, const Vector& u,
                  double dt, NoiseSource& disturbance);

// Same step with a pre-drawn disturbance increment `w` (already dt-scaled).
// Lets several plant copies share one noise realization.
Vector euler_step(const LinearSystem& sys, const Vector& x, const Vector& u,
                  double dt, const Vector& w);

// y = C x + sensor sample.
Vector observe(const LinearSystem& sys, const Vector& x, NoiseSource& sensor);
Vector observe(const LinearSystem& sys, const Vector& x, const Vector& n);

using Dynamics = std::function<Vector(const Vector& x, const Vector& u)>;

struct Linearization {
  Matrix A;
  Matrix B;
};

// Central finite-difference Jacobians of `f` at an equilibrium. Throws
// NumericalError if ||f(x_eq, u_eq)|| >= 1e-6.
Linearization linearize(const Dynamics& f, const Vector& x_eq,
                        const Vector& u_eq, double step = 1e-6);

}  // namespace scnctl
