#pragma once

#include "scnctl/state_space.hpp"
#include "scnctl/types.hpp"

namespace scnctl {

// Spring-mass-damper; state (position, velocity).
struct SmdParams {
  double m = 3.0;
  double k = 5.0;
  double c = 0.5;
};

// Cart with a pendulum; state (cart position, cart velocity, pole angle,
// angular velocity). The pole is upright at angle pi; g follows the
// negative-down convention (g = -10).
struct CartpoleParams {
  double m = 1.0;   // pole mass
  double M = 5.0;   // cart mass
  double L = 2.0;   // pole length
  double g = -10.0;
  double d = 1.0;   // cart damping
};

// Rectangular force pulse on [onset, onset + duration).
struct PulseSchedule {
  double onset = 2.5;
  double duration = 0.1;
  double magnitude = 0.0;
};

struct PlantMatrices {
  Matrix A;
  Matrix B;
  Matrix C;
};

void require_valid(const SmdParams& p);
void require_valid(const CartpoleParams& p);
void require_valid(const PulseSchedule& s);

Vector smd_dynamics(const SmdParams& p, const Vector& x, double u);
PlantMatrices smd_linear(const SmdParams& p);
// Mechanical energy k x1^2 / 2 + m x2^2 / 2.
double smd_energy(const SmdParams& p, const Vector& x);

Vector cartpole_dynamics(const CartpoleParams& p, const Vector& x, double u);
// Analytic Jacobian at (0, 0, pi, 0), u = 0; C observes the cart position.
PlantMatrices cartpole_linearize_up(const CartpoleParams& p);
// Upright equilibrium state (0, 0, pi, 0).
Vector cartpole_up_state();

double pulse_force(const PulseSchedule& s, double t);

}  // namespace scnctl
