#include "phslab/control/tracking.hpp"

#include <Eigen/QR>

namespace phslab::control {

TrackingController::TrackingController(NominalModel model, DesiredDynamics desired,
                                       std::shared_ptr<const ReferencePlan> plan)
    : model_(std::move(model)), desired_(std::move(desired)), plan_(std::move(plan)) {
  if (!plan_) throw InvalidArgument("TrackingController: null plan");
  if (plan_->dim_state() != model_.dim_state) {
    throw InvalidArgument("TrackingController: plan and model dimensions differ");
  }
  if (!model_.drift || !model_.io_matrix) {
    throw InvalidArgument("TrackingController: nominal model is incomplete");
  }
}

Vec TrackingController::control(double t, const Vec& x) const {
  const Vec xd = plan_->state(t);
  const Vec xd_dot = plan_->derivative(t);
  const Vec xbar = x - xd;
  const Vec target =
      (desired_.interconnection(xbar) - desired_.damping(xbar)) * desired_.energy_gradient(x, xd);
  const Mat G = model_.io_matrix(x);
  // Least-squares solve = (G^T G)^{-1} G^T for full column rank G.
  const Vec u = G.colPivHouseholderQr().solve(target + xd_dot - model_.drift(x));
  if (!u.allFinite()) throw ModelEvaluationError("TrackingController: non-finite control");
  return u;
}

Vec TrackingController::port_output(double t, const Vec& x) const {
  const Vec xd = plan_->state(t);
  return model_.io_matrix(x).transpose() * desired_.energy_gradient(x, xd);
}

double TrackingController::storage(double t, const Vec& x) const {
  return desired_.energy(x, plan_->state(t));
}

Vec TrackingController::tracking_error(double t, const Vec& x) const {
  return x - plan_->state(t);
}

phs::Feedback TrackingController::feedback() const {
  return [this](double t, const Vec& x) { return control(t, x); };
}

phs::Feedback TrackingController::semi_passive(phs::InputSignal external) const {
  if (!external) return feedback();
  return [this, external = std::move(external)](double t, const Vec& x) {
    return Vec(control(t, x) + external(t));
  };
}

double microactuator_reduced_control(double r_hat, double rd_inverse, const Vec& grad_hd,
                                     double xd_dot3, const Vec& grad_h_hat) {
  return r_hat * (-rd_inverse * grad_hd(2) + xd_dot3) + grad_h_hat(2);
}

ClosedLoopRun run_closed_loop(const phs::PhsModel& plant, const TrackingController& controller,
                              const Vec& x0, const std::vector<double>& times,
                              const phs::InputSignal& external, const phs::StepControl& step) {
  ClosedLoopRun run;
  run.trajectory = phs::simulate(plant, x0, controller.semi_passive(external), times, step);
  const int n = plant.dim_state;
  const int m = plant.dim_input;
  const auto K = static_cast<Eigen::Index>(times.size());
  run.references.resize(n, K);
  run.errors.resize(n, K);
  run.port_outputs.resize(m, K);
  run.external_inputs = Mat::Zero(m, K);
  run.storage.resize(times.size());
  for (Eigen::Index k = 0; k < K; ++k) {
    const double t = times[static_cast<std::size_t>(k)];
    const Vec x = run.trajectory.states.col(k);
    run.references.col(k) = controller.plan().state(t);
    run.errors.col(k) = x - run.references.col(k);
    run.port_outputs.col(k) = controller.port_output(t, x);
    run.storage[static_cast<std::size_t>(k)] = controller.storage(t, x);
    if (external) run.external_inputs.col(k) = external(t);
  }
  return run;
}

int count_increases(const std::vector<double>& series, double tolerance) {
  int count = 0;
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (series[k] - series[k - 1] > tolerance) ++count;
  }
  return count;
}

}  // namespace phslab::control
