#pragma once

#include <cstdint>
#include <random>

#include "scnctl/plants.hpp"
#include "scnctl/state_space.hpp"

namespace scnctl::testing {

inline LinearSystem smd_system(const SmdParams& p, double noise) {
  const PlantMatrices pm = smd_linear(p);
  return LinearSystem{pm.A, pm.B, pm.C, noise * Matrix::Identity(2, 2),
                      noise * Matrix::Identity(1, 1)};
}

// Small hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(eng_);
  }
  Matrix matrix(Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * normal_(eng_);
    return m;
  }
  Vector vector(Eigen::Index n, double scale = 1.0) { return matrix(n, 1, scale); }
  // Symmetric positive definite with eigenvalues in [lo, hi].
  Matrix spd(Eigen::Index n, double lo, double hi) {
    Eigen::HouseholderQR<Matrix> qr(matrix(n, n));
    const Matrix q = qr.householderQ();
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = uniform(lo, hi);
    return q * d.asDiagonal() * q.transpose();
  }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace scnctl::testing
