#pragma once

#include <memory>

#include "phslab/control/desired.hpp"
#include "phslab/control/reference_plan.hpp"
#include "phslab/phs/microactuator.hpp"

namespace fixtures {

using phslab::Mat;
using phslab::Vec;
namespace control = phslab::control;

inline Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

// Microactuator designed on its exact model: the "perfect" setting where the
// GP posterior is replaced by the true drift.
struct PerfectMicroactuator {
  phslab::phs::PhsModel plant = phslab::phs::make_microactuator();
  control::NominalModel nominal = control::nominal_from_plant(plant);
  control::DesiredDynamics desired;

  explicit PerfectMicroactuator(double rd_inverse = 10.0, double rd_gap = 0.0) {
    auto [Jd, Rd] = control::microactuator_target_structure(0.5, rd_inverse);
    Rd(0, 0) = rd_gap;
    desired = control::shifted_energy_target(Jd, Rd, control::energy_of(plant), v3(1, 0, 0));
  }

  [[nodiscard]] control::ReferencePlan plan(double t1 = 13.0, double step = 20.0 / 299.0) const {
    control::PlanOptions opts;
    opts.t1 = t1;
    opts.grid_step = step;
    opts.seed_state = v3(1.0, 0.0, 0.1);
    return control::solve_reference_plan(nominal, desired, control::air_gap_reference(), opts);
  }
};

}  // namespace fixtures
