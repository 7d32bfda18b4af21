#pragma once

#include <functional>
#include <vector>

#include "phslab/control/desired.hpp"
#include "phslab/phs/trajectory.hpp"

namespace phslab::control {

struct LaSalleReport {
  int runs = 0;
  int converged = 0;
  double fraction = 0.0;
  std::vector<double> final_errors;
  /// Runs that end with vanishing dissipation while still away from the
  /// reference (candidate spurious invariant set).
  int stalled = 0;
};

/// Empirical check on an ensemble of closed-loop runs: fraction with final
/// ||x - x_d|| <= tolerance. Evidence only; it proves nothing.
LaSalleReport lasalle_probe(const std::vector<phs::Trajectory>& runs,
                            const std::function<Vec(double)>& reference,
                            const DesiredDynamics& desired, double tolerance = 1e-3,
                            double stall_dissipation = 1e-10);

}  // namespace phslab::control
