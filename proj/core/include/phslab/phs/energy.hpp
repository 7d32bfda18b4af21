#pragma once

#include <vector>

#include "phslab/phs/model.hpp"
#include "phslab/phs/trajectory.hpp"

namespace phslab::phs {

struct EnergyBalance {
  /// |dH/dt - (-grad H^T R grad H + y^T u)| per sampling interval, with the
  /// power averaged over the interval endpoints.
  std::vector<double> residuals;
  std::vector<double> hamiltonian;  // H(x_k)
  double max_residual = 0.0;
  /// Sum of residual * dt, a bound on the accumulated balance error.
  double accumulated_bound = 0.0;
  /// Trapezoidal integral of the supplied power y^T u.
  double supplied_energy = 0.0;
};

/// Checks dH/dt = -grad H^T R grad H + y^T u along a trajectory. Outputs are
/// recomputed from the model when the trajectory carries none.
EnergyBalance energy_balance_residual(const PhsModel& model, const Trajectory& traj);

}  // namespace phslab::phs
