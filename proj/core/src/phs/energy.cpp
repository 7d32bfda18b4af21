#include "phslab/phs/energy.hpp"

#include <cmath>

namespace phslab::phs {

EnergyBalance energy_balance_residual(const PhsModel& model, const Trajectory& traj) {
  traj.validate();
  const int k = traj.size();
  EnergyBalance out;
  out.hamiltonian.resize(k);
  std::vector<double> power(k), supplied(k);
  for (int j = 0; j < k; ++j) {
    const Vec x = traj.states.col(j);
    const Vec y = traj.outputs ? Vec(traj.outputs->col(j)) : model.output(x);
    out.hamiltonian[j] = model.hamiltonian(x);
    supplied[j] = y.dot(traj.inputs.col(j));
    power[j] = -model.dissipated_power(x) + supplied[j];
  }
  out.residuals.resize(k > 0 ? k - 1 : 0);
  for (int j = 0; j + 1 < k; ++j) {
    const double dt = traj.times[j + 1] - traj.times[j];
    const double rate = (out.hamiltonian[j + 1] - out.hamiltonian[j]) / dt;
    const double r = std::abs(rate - 0.5 * (power[j] + power[j + 1]));
    out.residuals[j] = r;
    out.max_residual = std::max(out.max_residual, r);
    out.accumulated_bound += r * dt;
    out.supplied_energy += 0.5 * (supplied[j] + supplied[j + 1]) * dt;
  }
  return out;
}

}  // namespace phslab::phs
