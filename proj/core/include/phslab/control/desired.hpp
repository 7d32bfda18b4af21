#pragma once

#include <functional>
#include <memory>

#include "phslab/common.hpp"
#include "phslab/gp/gp_phs_model.hpp"
#include "phslab/phs/model.hpp"

namespace phslab::control {

/// Drift estimate and input matrix the controller is designed on. For a
/// GP-PHS this is the posterior mean mu(xdot | x, D) with envelope
/// beta * var; for the exact ("perfect") model the envelope is zero.
struct NominalModel {
  int dim_state = 0;
  int dim_input = 0;
  std::function<Vec(const Vec&)> drift;
  std::function<Mat(const Vec&)> io_matrix;
  std::function<Vec(const Vec&)> envelope;
};

NominalModel nominal_from_gp(std::shared_ptr<const gp::GpPhsModel> model);
NominalModel nominal_from_plant(const phs::PhsModel& plant);

/// Scalar energy with gradient.
struct EnergyFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

EnergyFunction energy_of(const phs::PhsModel& plant);
EnergyFunction energy_of(std::shared_ptr<const gp::GpPhsModel> model);

/// Target error dynamics xbar' = [Jd(xbar) - Rd(xbar)] grad_xbar Hd(x, xd).
struct DesiredDynamics {
  std::function<Mat(const Vec&)> interconnection;  // Jd(xbar)
  std::function<Mat(const Vec&)> damping;          // Rd(xbar)
  std::function<double(const Vec&, const Vec&)> energy;
  std::function<Vec(const Vec&, const Vec&)> energy_gradient;  // w.r.t. xbar

  /// Jd skew and Rd diagonal with nonnegative entries at xbar; throws
  /// InvalidArgument otherwise.
  void check_structure(const Vec& xbar) const;
};

/// Hd(x, xd) = H(x - xd + shift) - H(shift), constant Jd and Rd.
/// With shift = 0 this is the literal candidate H(x - xd).
DesiredDynamics shifted_energy_target(const Mat& Jd, const Mat& Rd, EnergyFunction H,
                                      const Vec& shift);

/// Microactuator target structure: Jd = [[0,1,0],[-1,0,0],[0,0,0]] and
/// Rd = diag(0, b_hat, 1/r_d).
std::pair<Mat, Mat> microactuator_target_structure(double b_hat, double rd_inverse);

/// Local minimizer of H started from `seed` (L-BFGS, gradient max-norm
/// below `tolerance`).
Vec minimize_energy(const EnergyFunction& H, const Vec& seed, double tolerance = 1e-10);

struct HdValidation {
  bool passed = false;
  Vec argmin;              // grid x_bar with the smallest Hd
  Vec nearest_to_zero;     // grid point closest to x_bar = 0
  double min_value = 0.0;
  double gap = 0.0;        // second-smallest value minus the minimum
};

/// Grid search of Hd(xd + xbar, xd) over the box [lower, upper] with
/// `resolution` points per axis. Passes iff the argmin is the grid point
/// nearest to xbar = 0 and the gap to the next value is positive.
HdValidation validate_hd_minimum(const DesiredDynamics& desired, const Vec& xd, const Vec& lower,
                                 const Vec& upper, int resolution);

}  // namespace phslab::control
