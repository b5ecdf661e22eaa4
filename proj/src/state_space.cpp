#include "scnctl/state_space.hpp"

#include <sstream>

namespace scnctl {

namespace {

bool symmetric(const Matrix& m) {
  return (m - m.transpose()).norm() <= 1e-12 * std::max(1.0, m.norm());
}

double min_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()),
                                            Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace

std::vector<std::string> validate(const LinearSystem& sys) {
  std::vector<std::string> out;
  const bool a_square = sys.A.rows() == sys.A.cols();
  if (!a_square) out.push_back("A not square (" + shape_str(sys.A) + ")");
  const Eigen::Index k = sys.A.rows();
  if (sys.B.rows() != k) {
    out.push_back("B row count " + std::to_string(sys.B.rows()) +
                  " does not match state dimension " + std::to_string(k));
  }
  if (sys.C.cols() != k) {
    out.push_back("C column count " + std::to_string(sys.C.cols()) +
                  " does not match state dimension " + std::to_string(k));
  }
  if (sys.Sigma_d.rows() != k || sys.Sigma_d.cols() != k) {
    out.push_back("Sigma_d shape " + shape_str(sys.Sigma_d) +
                  " does not match state dimension");
  } else {
    if (!symmetric(sys.Sigma_d)) out.push_back("Sigma_d not symmetric");
    else if (k > 0 && min_eig(sys.Sigma_d) < -1e-12 * std::max(1.0, sys.Sigma_d.norm()))
      out.push_back("Sigma_d not positive semidefinite");
  }
  const Eigen::Index q = sys.C.rows();
  if (sys.Sigma_n.rows() != q || sys.Sigma_n.cols() != q) {
    out.push_back("Sigma_n shape " + shape_str(sys.Sigma_n) +
                  " does not match observation dimension");
  } else {
    if (!symmetric(sys.Sigma_n)) out.push_back("Sigma_n not symmetric");
    else if (q > 0 && min_eig(sys.Sigma_n) <= 0.0)
      out.push_back("Sigma_n not positive definite");
  }
  return out;
}

void require_valid(const LinearSystem& sys) {
  auto problems = validate(sys);
  if (problems.empty()) return;
  std::string msg = "invalid linear system:";
  for (const auto& p : problems) msg += " " + p + ";";
  throw DimensionError(msg);
}

Vector euler_step(const LinearSystem& sys, const Vector& x, const Vector& u,
                  double dt, const Vector& w) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  if (x.size() != sys.A.cols() || u.size() != sys.B.cols() ||
      w.size() != x.size()) {
    throw DimensionError("euler_step: x/u/w dimension mismatch");
  }
  return x + dt * (sys.A * x + sys.B * u) + w;
}

Vector euler_step(const LinearSystem& sys, const Vector& x, const Vector& u,
                  double dt, NoiseSource& disturbance) {
  if (disturbance.dim() != x.size()) {
    throw DimensionError("euler_step: disturbance dimension mismatch");
  }
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  return euler_step(sys, x, u, dt, disturbance.sample_scaled(dt));
}

Vector observe(const LinearSystem& sys, const Vector& x, const Vector& n) {
  if (x.size() != sys.C.cols() || n.size() != sys.C.rows()) {
    throw DimensionError("observe: dimension mismatch");
  }
  return sys.C * x + n;
}

Vector observe(const LinearSystem& sys, const Vector& x, NoiseSource& sensor) {
  if (sensor.dim() != sys.C.rows()) {
    throw DimensionError("observe: sensor noise dimension mismatch");
  }
  return observe(sys, x, sensor.sample());
}

Linearization linearize(const Dynamics& f, const Vector& x_eq,
                        const Vector& u_eq, double step) {
  const Vector f0 = f(x_eq, u_eq);
  const double residual = f0.norm();
  if (!(residual < 1e-6)) {
    std::ostringstream os;
    os << "linearize: not an equilibrium, ||f(x_eq, u_eq)|| = " << residual;
    throw NumericalError(os.str());
  }
  const Eigen::Index k = x_eq.size();
  const Eigen::Index p = u_eq.size();
  Linearization lin{Matrix(f0.size(), k), Matrix(f0.size(), p)};
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector xp = x_eq, xm = x_eq;
    xp[j] += step;
    xm[j] -= step;
    lin.A.col(j) = (f(xp, u_eq) - f(xm, u_eq)) / (2.0 * step);
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    Vector up = u_eq, um = u_eq;
    up[j] += step;
    um[j] -= step;
    lin.B.col(j) = (f(x_eq, up) - f(x_eq, um)) / (2.0 * step);
  }
  return lin;
}

}  // namespace scnctl
