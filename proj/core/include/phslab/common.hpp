#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace phslab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when a vector field, Hamiltonian or structure matrix evaluates to a
/// non-finite value.
class ModelEvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a construction-time invariant is violated (bad parameters,
/// inconsistent dimensions, etc.).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace phslab
