#include "phslab/phs/ida_pbc.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include "phslab/linalg.hpp"

namespace phslab::phs {

Vec classical_matching_residual(const PhsModel& model, const SetPointTarget& target,
                                const Vec& x) {
  const Mat G = model.io_matrix(x);
  const Mat annihilator = left_annihilator(G);
  const Vec desired = (target.interconnection(x) - target.damping(x)) * target.energy_gradient(x);
  return annihilator * (desired - model.drift(x));
}

std::function<Vec(const Vec&)> classical_ida_pbc_control(const PhsModel& model,
                                                         const SetPointTarget& target,
                                                         const Mat& check_states,
                                                         double matching_tol) {
  for (Eigen::Index k = 0; k < check_states.cols(); ++k) {
    const Vec x = check_states.col(k);
    const Mat G = model.io_matrix(x);
    Eigen::JacobiSVD<Mat> svd(G);
    const auto& s = svd.singularValues();
    if (s.size() < G.cols() || s(s.size() - 1) <= 1e-12 * std::max(1.0, s(0))) {
      throw SynthesisError(fmt::format("classical IDA-PBC: G^T G is singular at state {}", k));
    }
    const Vec residual = classical_matching_residual(model, target, x);
    if (residual.size() > 0 && residual.cwiseAbs().maxCoeff() > matching_tol) {
      throw SynthesisError(fmt::format(
          "classical IDA-PBC: matching equation violated at state {} (residual {:.3e})", k,
          residual.cwiseAbs().maxCoeff()));
    }
  }
  return [model, target](const Vec& x) -> Vec {
    const Mat G = model.io_matrix(x);
    const Vec desired =
        (target.interconnection(x) - target.damping(x)) * target.energy_gradient(x);
    return (G.transpose() * G).ldlt().solve(G.transpose() * (desired - model.drift(x)));
  };
}

}  // namespace phslab::phs
