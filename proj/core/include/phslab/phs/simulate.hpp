#pragma once

#include <functional>
#include <stdexcept>

#include "phslab/phs/model.hpp"
#include "phslab/phs/trajectory.hpp"

namespace phslab::phs {

/// Integration failed: step size underflow, state blow-up or a failing
/// model evaluation. `last_time` is the last time with a valid state.
class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(const std::string& what, double last_time)
      : std::runtime_error(what), last_time_(last_time) {}
  [[nodiscard]] double last_time() const { return last_time_; }

 private:
  double last_time_;
};

struct StepControl {
  double abs_tol = 1e-8;
  double rel_tol = 1e-8;
  double initial_step = 1e-3;
  double max_state_norm = 1e8;
  /// Maximum number of internal steps between two output samples.
  int max_steps_per_sample = 100000;
};

using InputSignal = std::function<Vec(double)>;
/// State feedback u(t, x).
using Feedback = std::function<Vec(double, const Vec&)>;

/// Integrates `model` under feedback `u` and samples the solution at
/// `sample_times` (increasing, first entry is the initial time).
Trajectory simulate(const PhsModel& model, const Vec& x0, const Feedback& u,
                    const std::vector<double>& sample_times,
                    const StepControl& control = {});

/// Open-loop run on `num_samples` uniform points in [t0, t1].
Trajectory simulate(const PhsModel& model, const Vec& x0, const InputSignal& u,
                    double t0, double t1, int num_samples,
                    const StepControl& control = {});

/// Integrates an arbitrary vector field f(t, x); used for closed loops where
/// the plant is not a PhsModel. Returns the states (n x K).
Mat integrate(const std::function<Vec(double, const Vec&)>& f, const Vec& x0,
              const std::vector<double>& sample_times,
              const StepControl& control = {});

std::vector<double> uniform_grid(double t0, double t1, int num_samples);

}  // namespace phslab::phs
