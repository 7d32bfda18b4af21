#pragma once

#include <functional>
#include <span>

#include "phslab/common.hpp"

namespace phslab::phs {

/// Input-state-output port-Hamiltonian system
///
///   xdot = [J(x) - R(x)] grad H(x) + G(x) u
///   y    = G(x)^T grad H(x)
///
/// Each structural component is a callable so nonlinear systems can be
/// expressed directly. Evaluation is pure; a PhsModel may be shared across
/// threads.
struct PhsModel {
  int dim_state = 0;
  int dim_input = 0;
  std::function<Mat(const Vec&)> interconnection;  // J(x), skew
  std::function<Mat(const Vec&)> dissipation;      // R(x), symmetric PSD
  std::function<Mat(const Vec&)> io_matrix;        // G(x), n x m
  std::function<double(const Vec&)> hamiltonian;
  std::function<Vec(const Vec&)> hamiltonian_gradient;

  /// [J - R] grad H + G u. Throws ModelEvaluationError on non-finite output.
  [[nodiscard]] Vec eval_dynamics(const Vec& x, const Vec& u) const;
  /// [J - R] grad H, the unforced part of the dynamics.
  [[nodiscard]] Vec drift(const Vec& x) const;
  /// y = G^T grad H.
  [[nodiscard]] Vec output(const Vec& x) const;
  /// grad H^T R grad H, the instantaneous dissipated power.
  [[nodiscard]] double dissipated_power(const Vec& x) const;
};

struct StructureCheck {
  double max_skew_error = 0.0;       // max |J + J^T| relative to max|J|
  double min_dissipation_eig = 0.0;  // smallest eigenvalue of R over all states
  double max_gradient_error = 0.0;   // relative error of grad H vs central FD
  [[nodiscard]] bool ok() const {
    return max_skew_error <= 1e-12 && min_dissipation_eig >= -1e-10 &&
           max_gradient_error <= 1e-6;
  }
};

/// Evaluates the structural invariants of `model` at the given states
/// (columns of `states`).
StructureCheck check_structure(const PhsModel& model, const Mat& states);

/// Builds a constant-coefficient linear PHS with quadratic Hamiltonian
/// H = 1/2 x^T Q x.
PhsModel make_linear(const Mat& J, const Mat& R, const Mat& G, const Mat& Q);

}  // namespace phslab::phs
