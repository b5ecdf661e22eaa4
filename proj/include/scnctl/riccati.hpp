#pragma once

#include "scnctl/types.hpp"

namespace scnctl {

// Quadratic LQR cost: integral of x' Q x + u' R u.
struct LqrCost {
  Matrix Q;  // K x K, symmetric PSD
  Matrix R;  // P x P, symmetric PD
};

// Stabilizing solution of  A'P + PA - P B R^-1 B' P + Q = 0.
struct CareSolution {
  Matrix P;
  double residual_norm = 0.0;       // Frobenius norm of the CARE residual
  ComplexVector closed_loop_eigs;   // spectrum of A - B R^-1 B' P
};

// Frobenius norm of the CARE residual for a candidate P.
double care_residual(const Matrix& A, const Matrix& B, const Matrix& Q,
                     const Matrix& R, const Matrix& P);

// Solves the continuous algebraic Riccati equation.
//
// The stable invariant subspace of the Hamiltonian
//   H = [[A, -B R^-1 B'], [-Q, -A']]
// gives P = X2 X1^-1; the result is symmetrized and polished with
// Newton-Kleinman steps. Throws NumericalError if the Hamiltonian has
// eigenvalues on the imaginary axis, X1 is singular (pair not
// stabilizable) or the polished solution fails the residual/stability
// checks.
CareSolution solve_care(const Matrix& A, const Matrix& B, const Matrix& Q,
                        const Matrix& R);

// K_c = R^-1 B' P.
Matrix lqr_gain(const CareSolution& sol, const Matrix& B, const Matrix& R);

// Convenience: solve_care + lqr_gain.
Matrix lqr_gain(const Matrix& A, const Matrix& B, const LqrCost& cost);

// Solution of the filter Riccati equation
//   A S + S A' - S C' Sigma_n^-1 C S + Sigma_d = 0
// (the CARE of the dual pair (A', C')).
CareSolution solve_filter_care(const Matrix& A, const Matrix& C,
                               const Matrix& Sigma_d, const Matrix& Sigma_n);

// Kalman gain in the convention  xhat' = A xhat + B u + K_f (C xhat - y):
// K_f = -S C' Sigma_n^-1, so A + K_f C is stable.
Matrix kalman_gain(const Matrix& A, const Matrix& C, const Matrix& Sigma_d,
                   const Matrix& Sigma_n);

// Solves A' X + X A = -M for X by Kronecker vectorization (small K only).
Matrix solve_lyapunov(const Matrix& A, const Matrix& M);

bool is_hurwitz(const Matrix& A);
ComplexVector eigenvalues(const Matrix& A);

}  // namespace scnctl
