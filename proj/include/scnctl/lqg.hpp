#pragma once

#include "scnctl/state_space.hpp"
#include "scnctl/types.hpp"

namespace scnctl {

// Non-spiking reference controller: continuous Kalman filter plus LQR law.
struct LqgState {
  Vector x_hat;
  Vector u;
};

// u = -K_c (x_hat - z);  x_hat += dt (A x_hat + B u + K_f (C x_hat - y)).
// The returned state carries the u that was applied during the step.
LqgState lqg_step(const LinearSystem& model, const Matrix& K_f,
                  const Matrix& K_c, const LqgState& st, const Vector& y,
                  const Vector& z, double dt);

// Kalman filter alone with an externally supplied input.
LqgState estimator_step(const LinearSystem& model, const Matrix& K_f,
                        const LqgState& st, const Vector& y,
                        const Vector& u_ext, double dt);

// Steady state of the noiseless closed loop under a constant reference:
// solves (A - B K_c) x + B K_c z = 0.
Vector lqg_steady_state(const LinearSystem& model, const Matrix& K_c,
                        const Vector& z);

}  // namespace scnctl
