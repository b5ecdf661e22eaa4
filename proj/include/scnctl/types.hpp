#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace scnctl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

// Raised when operands have inconsistent shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a numerical procedure cannot produce a valid result
// (non-stabilizable pair, diverged network, dropped pole, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string shape_str(const Matrix& m);

}  // namespace scnctl
