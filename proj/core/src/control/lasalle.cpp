#include "phslab/control/lasalle.hpp"

namespace phslab::control {

LaSalleReport lasalle_probe(const std::vector<phs::Trajectory>& runs,
                            const std::function<Vec(double)>& reference,
                            const DesiredDynamics& desired, double tolerance,
                            double stall_dissipation) {
  LaSalleReport report;
  for (const auto& run : runs) {
    if (run.size() == 0) continue;
    const double t = run.times.back();
    const Vec x = run.states.col(run.size() - 1);
    const Vec xd = reference(t);
    const double err = (x - xd).norm();
    report.final_errors.push_back(err);
    ++report.runs;
    if (err <= tolerance) {
      ++report.converged;
      continue;
    }
    const Vec grad = desired.energy_gradient(x, xd);
    if (grad.dot(desired.damping(x - xd) * grad) <= stall_dissipation) ++report.stalled;
  }
  report.fraction = report.runs == 0 ? 0.0 : static_cast<double>(report.converged) / report.runs;
  return report;
}

}  // namespace phslab::control
