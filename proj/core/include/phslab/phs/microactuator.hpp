#pragma once

#include <functional>
#include <string>

#include "phslab/phs/model.hpp"

namespace phslab::phs {

/// Electrical part of the microactuator energy, given as the elastance
/// 1/C(x1) and its derivative with respect to the gap x1.
struct CapacitanceLaw {
  std::string name;
  std::function<double(double)> elastance;
  std::function<double(double)> elastance_derivative;
};

/// Parallel plate capacitor C(x1) = c0 / x1, i.e. 1/C = x1 / c0.
CapacitanceLaw parallel_plate(double c0 = 1.0);

struct MicroactuatorParams {
  double mass = 1.0;
  double damping = 0.5;
  double stiffness = 10.0;
  double resistance = 1.0;
  double rest_gap = 1.0;
  CapacitanceLaw capacitance = parallel_plate(1.0);
  /// When set, the electrical energy is x3^2 / (2 C) instead of x3^2 / C.
  bool half_electrical_energy = false;
  /// Gap interval on which the capacitance law is validated.
  double gap_min = 0.0;
  double gap_max = 2.0;
};

/// Electrostatic microactuator with state (gap, momentum, charge):
///
///   J - R = [[0, 1, 0], [-1, -b, 0], [0, 0, -1/r]],  G = (0, 0, 1/r)^T
///   H = k/2 (x1 - x1s)^2 + x2^2 / (2 m) + x3^2 / C(x1)
///
/// Throws InvalidArgument when the parameters are out of range or the
/// capacitance is non-positive somewhere on [gap_min, gap_max].
PhsModel make_microactuator(const MicroactuatorParams& params = {});

}  // namespace phslab::phs
