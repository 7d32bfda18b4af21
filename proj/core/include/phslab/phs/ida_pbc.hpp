#pragma once

#include <functional>

#include "phslab/phs/model.hpp"

namespace phslab::phs {

/// Set-point target dynamics xdot = [Jd(x) - Rd(x)] grad Hd(x).
struct SetPointTarget {
  std::function<Mat(const Vec&)> interconnection;
  std::function<Mat(const Vec&)> damping;
  std::function<double(const Vec&)> energy;
  std::function<Vec(const Vec&)> energy_gradient;
};

class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// G_perp ([Jd - Rd] grad Hd - [J - R] grad H); empty for fully actuated
/// systems.
Vec classical_matching_residual(const PhsModel& model, const SetPointTarget& target,
                                const Vec& x);

/// Classical IDA-PBC law u = (G^T G)^{-1} G^T ([Jd - Rd] grad Hd - [J - R] grad H).
///
/// Checks G^T G invertibility and the matching residual at the columns of
/// `check_states`; throws SynthesisError when either fails.
std::function<Vec(const Vec&)> classical_ida_pbc_control(const PhsModel& model,
                                                         const SetPointTarget& target,
                                                         const Mat& check_states,
                                                         double matching_tol = 1e-8);

}  // namespace phslab::phs
