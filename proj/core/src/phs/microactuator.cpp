#include "phslab/phs/microactuator.hpp"

#include <cmath>

#include <fmt/format.h>

namespace phslab::phs {

CapacitanceLaw parallel_plate(double c0) {
  if (!(c0 > 0.0)) throw InvalidArgument("parallel_plate: c0 must be positive");
  return {fmt::format("parallel_plate(c0={})", c0),
          [c0](double x1) { return x1 / c0; }, [c0](double) { return 1.0 / c0; }};
}

PhsModel make_microactuator(const MicroactuatorParams& p) {
  if (!(p.mass > 0.0) || !(p.resistance > 0.0) || !(p.stiffness > 0.0) || !(p.damping >= 0.0)) {
    throw InvalidArgument("make_microactuator: require m, r, k > 0 and b >= 0");
  }
  if (!p.capacitance.elastance || !p.capacitance.elastance_derivative) {
    throw InvalidArgument("make_microactuator: capacitance law is incomplete");
  }
  if (!(p.gap_max >= p.gap_min)) throw InvalidArgument("make_microactuator: empty gap interval");
  constexpr int kChecks = 201;
  for (int i = 0; i < kChecks; ++i) {
    const double x1 = p.gap_min + (p.gap_max - p.gap_min) * i / (kChecks - 1);
    const double e = p.capacitance.elastance(x1);
    // C = 1/e > 0 (e = 0 means an unbounded but positive capacitance).
    if (!std::isfinite(e) || e < 0.0) {
      throw InvalidArgument(fmt::format(
          "make_microactuator: capacitance {} is non-positive at x1 = {}", p.capacitance.name, x1));
    }
  }

  const double b = p.damping;
  const double r = p.resistance;
  const double m = p.mass;
  const double k = p.stiffness;
  const double xs = p.rest_gap;
  const double w = p.half_electrical_energy ? 0.5 : 1.0;
  const auto elastance = p.capacitance.elastance;
  const auto elastance_dx = p.capacitance.elastance_derivative;

  PhsModel model;
  model.dim_state = 3;
  model.dim_input = 1;
  model.interconnection = [](const Vec&) {
    Mat J = Mat::Zero(3, 3);
    J(0, 1) = 1.0;
    J(1, 0) = -1.0;
    return J;
  };
  model.dissipation = [b, r](const Vec&) {
    Mat R = Mat::Zero(3, 3);
    R(1, 1) = b;
    R(2, 2) = 1.0 / r;
    return R;
  };
  model.io_matrix = [r](const Vec&) {
    Mat G = Mat::Zero(3, 1);
    G(2, 0) = 1.0 / r;
    return G;
  };
  model.hamiltonian = [=](const Vec& x) {
    const double d = x(0) - xs;
    return 0.5 * k * d * d + x(1) * x(1) / (2.0 * m) + w * elastance(x(0)) * x(2) * x(2);
  };
  model.hamiltonian_gradient = [=](const Vec& x) {
    Vec g(3);
    g(0) = k * (x(0) - xs) + w * elastance_dx(x(0)) * x(2) * x(2);
    g(1) = x(1) / m;
    g(2) = 2.0 * w * elastance(x(0)) * x(2);
    return g;
  };
  return model;
}

}  // namespace phslab::phs
