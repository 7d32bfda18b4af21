#pragma once

#include <memory>

#include "phslab/control/reference_plan.hpp"
#include "phslab/phs/simulate.hpp"

namespace phslab::control {

/// u(x, t) = (G^T G)^{-1} G^T ([Jd - Rd] grad_xbar Hd + xd_dot - mu(x)), all
/// structure matrices from the nominal model.
class TrackingController {
 public:
  TrackingController(NominalModel model, DesiredDynamics desired,
                     std::shared_ptr<const ReferencePlan> plan);

  /// Throws PlanRangeError when t lies outside the plan.
  [[nodiscard]] Vec control(double t, const Vec& x) const;
  /// Passivating port output y_ex = G^T grad_xbar Hd.
  [[nodiscard]] Vec port_output(double t, const Vec& x) const;
  /// Hd(x, x_d(t)).
  [[nodiscard]] double storage(double t, const Vec& x) const;
  [[nodiscard]] Vec tracking_error(double t, const Vec& x) const;

  [[nodiscard]] phs::Feedback feedback() const;
  /// control(t, x) + u_ex(t).
  [[nodiscard]] phs::Feedback semi_passive(phs::InputSignal external) const;

  [[nodiscard]] const NominalModel& model() const { return model_; }
  [[nodiscard]] const DesiredDynamics& desired() const { return desired_; }
  [[nodiscard]] const ReferencePlan& plan() const { return *plan_; }

 private:
  NominalModel model_;
  DesiredDynamics desired_;
  std::shared_ptr<const ReferencePlan> plan_;
};

/// Microactuator specialization of the control law:
/// u = r_hat (-(1/r_d) dHd/dxbar3 + xd_dot3) + dH_hat/dx3.
/// At r_hat = 1 this is the printed reduced form.
double microactuator_reduced_control(double r_hat, double rd_inverse, const Vec& grad_hd,
                                     double xd_dot3, const Vec& grad_h_hat);

struct ClosedLoopRun {
  phs::Trajectory trajectory;  // inputs hold the total applied input
  Mat references;              // x_d at the samples
  Mat errors;                  // x - x_d
  std::vector<double> storage;  // Hd along the run
  Mat port_outputs;            // y_ex
  Mat external_inputs;         // u_ex (zero when none)
};

/// Simulates plant + controller (+ optional external input) on `times`.
ClosedLoopRun run_closed_loop(const phs::PhsModel& plant, const TrackingController& controller,
                              const Vec& x0, const std::vector<double>& times,
                              const phs::InputSignal& external = nullptr,
                              const phs::StepControl& step = {});

/// Number of sample-to-sample increases of `series` larger than `tolerance`.
int count_increases(const std::vector<double>& series, double tolerance);

}  // namespace phslab::control
