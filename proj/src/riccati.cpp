#include "scnctl/riccati.hpp"

#include <sstream>

#include <Eigen/Eigenvalues>

namespace scnctl {

namespace {

void check_square(const Matrix& m, const char* name, Eigen::Index n) {
  if (m.rows() != n || m.cols() != n) {
    throw DimensionError(std::string(name) + " must be " + std::to_string(n) +
                         "x" + std::to_string(n) + ", got " + shape_str(m));
  }
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

ComplexVector eigenvalues(const Matrix& A) {
  if (A.size() == 0) return ComplexVector();
  Eigen::EigenSolver<Matrix> es(A, false);
  return es.eigenvalues();
}

bool is_hurwitz(const Matrix& A) {
  const ComplexVector ev = eigenvalues(A);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev[i].real() < 0.0)) return false;
  }
  return true;
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& M) {
  const Eigen::Index n = A.rows();
  check_square(A, "A", n);
  check_square(M, "M", n);
  const Matrix I = Matrix::Identity(n, n);
  const Matrix At = A.transpose();
  // vec(A' X + X A) = (I kron A' + A' kron I) vec(X)
  Matrix L = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      L.block(i * n, j * n, n, n) += I(i, j) * At;
      L.block(i * n, j * n, n, n) += At(i, j) * I;
    }
  }
  Vector rhs = -Eigen::Map<const Vector>(M.data(), n * n);
  Vector x = L.fullPivLu().solve(rhs);
  return Eigen::Map<Matrix>(x.data(), n, n);
}

double care_residual(const Matrix& A, const Matrix& B, const Matrix& Q,
                     const Matrix& R, const Matrix& P) {
  const Matrix G = B * R.ldlt().solve(B.transpose());
  return (A.transpose() * P + P * A - P * G * P + Q).norm();
}

CareSolution solve_care(const Matrix& A, const Matrix& B, const Matrix& Q,
                        const Matrix& R) {
  const Eigen::Index k = A.rows();
  check_square(A, "A", k);
  if (B.rows() != k) {
    throw DimensionError("B must have " + std::to_string(k) + " rows, got " +
                         shape_str(B));
  }
  check_square(Q, "Q", k);
  check_square(R, "R", B.cols());

  Eigen::LDLT<Matrix> r_ldlt(symmetrize(R));
  if (r_ldlt.info() != Eigen::Success || !r_ldlt.isPositive() ||
      (B.cols() > 0 && r_ldlt.vectorD().minCoeff() <= 0.0)) {
    throw std::invalid_argument("R must be symmetric positive definite");
  }
  const Matrix G = B * r_ldlt.solve(B.transpose());

  Matrix H(2 * k, 2 * k);
  H << A, -G, -Q, -A.transpose();

  Eigen::ComplexEigenSolver<Matrix> ces(H, true);
  if (ces.info() != Eigen::Success) {
    throw NumericalError("solve_care: Hamiltonian eigendecomposition failed");
  }
  const double h_scale = std::max(1.0, H.norm());
  Eigen::MatrixXcd basis(2 * k, k);
  Eigen::Index found = 0;
  for (Eigen::Index i = 0; i < 2 * k; ++i) {
    const double re = ces.eigenvalues()[i].real();
    if (std::abs(re) < 1e-13 * h_scale) {
      throw NumericalError(
          "solve_care: Hamiltonian has eigenvalues on the imaginary axis "
          "(pair not stabilizable/detectable)");
    }
    if (re < 0.0) {
      if (found == k) break;
      basis.col(found++) = ces.eigenvectors().col(i);
    }
  }
  if (found != k) {
    throw NumericalError(
        "solve_care: could not isolate a stable invariant subspace");
  }
  const Eigen::MatrixXcd X1 = basis.topRows(k);
  const Eigen::MatrixXcd X2 = basis.bottomRows(k);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(X1);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) {
    throw NumericalError("solve_care: pair (A, B) is not stabilizable");
  }
  // P X1 = X2  =>  X1' P' = X2'
  Eigen::MatrixXcd Pc =
      X1.transpose().fullPivLu().solve(X2.transpose()).transpose();
  Matrix P = symmetrize(Pc.real());

  // Newton-Kleinman polish: (A - G P)' P+ + P+ (A - G P) = -(Q + P G P).
  double res = care_residual(A, B, Q, R, P);
  for (int iter = 0; iter < 4 && res > 1e-14 * std::max(1.0, P.norm()); ++iter) {
    const Matrix Acl = A - G * P;
    if (!is_hurwitz(Acl)) break;
    Matrix next = symmetrize(solve_lyapunov(Acl, Q + P * G * P));
    const double next_res = care_residual(A, B, Q, R, next);
    if (!(next_res < res)) break;
    P = next;
    res = next_res;
  }

  CareSolution sol;
  sol.P = P;
  sol.residual_norm = res;
  sol.closed_loop_eigs = eigenvalues(A - G * P);
  for (Eigen::Index i = 0; i < sol.closed_loop_eigs.size(); ++i) {
    if (!(sol.closed_loop_eigs[i].real() < 0.0)) {
      throw NumericalError("solve_care: closed loop is not stable");
    }
  }
  if (!(res < 1e-8)) {
    std::ostringstream os;
    os << "solve_care: residual " << res << " exceeds 1e-8";
    throw NumericalError(os.str());
  }
  return sol;
}

Matrix lqr_gain(const CareSolution& sol, const Matrix& B, const Matrix& R) {
  if (B.rows() != sol.P.rows()) throw DimensionError("lqr_gain: B rows");
  check_square(R, "R", B.cols());
  return R.ldlt().solve(B.transpose() * sol.P);
}

Matrix lqr_gain(const Matrix& A, const Matrix& B, const LqrCost& cost) {
  return lqr_gain(solve_care(A, B, cost.Q, cost.R), B, cost.R);
}

CareSolution solve_filter_care(const Matrix& A, const Matrix& C,
                               const Matrix& Sigma_d, const Matrix& Sigma_n) {
  if (C.cols() != A.rows()) {
    throw DimensionError("kalman: C must have " + std::to_string(A.rows()) +
                         " columns, got " + shape_str(C));
  }
  return solve_care(A.transpose(), C.transpose(), Sigma_d, Sigma_n);
}

Matrix kalman_gain(const Matrix& A, const Matrix& C, const Matrix& Sigma_d,
                   const Matrix& Sigma_n) {
  const CareSolution dual = solve_filter_care(A, C, Sigma_d, Sigma_n);
  // L = S C' Sigma_n^-1
  const Matrix L =
      Sigma_n.ldlt().solve(C * dual.P).transpose();
  return -L;
}

}  // namespace scnctl
