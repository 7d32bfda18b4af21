#include "phslab/phs/simulate.hpp"

#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

namespace phslab::phs {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

struct BlowUp {
  std::string what;
};

}  // namespace

std::vector<double> uniform_grid(double t0, double t1, int num_samples) {
  if (num_samples < 2 || !(t1 > t0)) throw InvalidArgument("uniform_grid: need t1 > t0 and >= 2 samples");
  std::vector<double> grid(num_samples);
  const double h = (t1 - t0) / (num_samples - 1);
  for (int k = 0; k < num_samples; ++k) grid[k] = t0 + h * k;
  grid.back() = t1;
  return grid;
}

Mat integrate(const std::function<Vec(double, const Vec&)>& f, const Vec& x0,
              const std::vector<double>& sample_times, const StepControl& control) {
  if (sample_times.empty()) throw InvalidArgument("integrate: empty time grid");
  if (!x0.allFinite()) throw InvalidArgument("integrate: non-finite initial state");
  const auto n = x0.size();
  Mat states(n, static_cast<Eigen::Index>(sample_times.size()));
  if (sample_times.size() == 1) {
    states.col(0) = x0;
    return states;
  }

  double last_time = sample_times.front();
  auto system = [&](const State& x, State& dxdt, double t) {
    const Eigen::Map<const Vec> xs(x.data(), n);
    if (!xs.allFinite() || xs.norm() > control.max_state_norm) {
      throw BlowUp{fmt::format("state blow-up near t = {}", t)};
    }
    Vec d;
    try {
      d = f(t, xs);
    } catch (const ModelEvaluationError& e) {
      throw BlowUp{fmt::format("model evaluation failed at t = {}: {}", t, e.what())};
    }
    if (!d.allFinite()) throw BlowUp{fmt::format("non-finite derivative at t = {}", t)};
    dxdt.assign(d.data(), d.data() + n);
  };
  Eigen::Index column = 0;
  auto observer = [&](const State& x, double t) {
    const Eigen::Map<const Vec> xs(x.data(), n);
    if (!xs.allFinite() || xs.norm() > control.max_state_norm) {
      throw BlowUp{fmt::format("state blow-up at t = {}", t)};
    }
    states.col(column++) = xs;
    last_time = t;
  };

  State x(x0.data(), x0.data() + n);
  auto stepper = odeint::make_dense_output(control.abs_tol, control.rel_tol,
                                           odeint::runge_kutta_dopri5<State>());
  try {
    odeint::integrate_times(stepper, system, x, sample_times.begin(), sample_times.end(),
                            control.initial_step, observer,
                            odeint::max_step_checker(control.max_steps_per_sample));
  } catch (const BlowUp& e) {
    throw SimulationDiverged(e.what, last_time);
  } catch (const odeint::odeint_error& e) {
    throw SimulationDiverged(fmt::format("integrator failed: {}", e.what()), last_time);
  }
  return states;
}

Trajectory simulate(const PhsModel& model, const Vec& x0, const Feedback& u,
                    const std::vector<double>& sample_times, const StepControl& control) {
  if (x0.size() != model.dim_state) throw InvalidArgument("simulate: x0 has the wrong dimension");
  Trajectory traj;
  traj.times = sample_times;
  traj.states = integrate(
      [&](double t, const Vec& x) { return model.eval_dynamics(x, u(t, x)); }, x0, sample_times,
      control);
  const auto k = traj.states.cols();
  traj.inputs.resize(model.dim_input, k);
  Mat outputs(model.dim_input, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Vec x = traj.states.col(j);
    traj.inputs.col(j) = u(sample_times[j], x);
    outputs.col(j) = model.output(x);
  }
  traj.outputs = std::move(outputs);
  return traj;
}

Trajectory simulate(const PhsModel& model, const Vec& x0, const InputSignal& u, double t0,
                    double t1, int num_samples, const StepControl& control) {
  return simulate(model, x0, [&](double t, const Vec&) { return u(t); },
                  uniform_grid(t0, t1, num_samples), control);
}

}  // namespace phslab::phs
