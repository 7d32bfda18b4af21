#include "phslab/phs/model.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "phslab/linalg.hpp"

namespace phslab::phs {

namespace {

void require_finite(const Vec& v, const char* what, const Vec& x) {
  if (!v.allFinite()) {
    throw ModelEvaluationError(fmt::format("{} is not finite at x = [{}]", what,
                                           fmt::join(x.data(), x.data() + x.size(), ", ")));
  }
}

}  // namespace

Vec PhsModel::drift(const Vec& x) const {
  Vec f = (interconnection(x) - dissipation(x)) * hamiltonian_gradient(x);
  require_finite(f, "drift", x);
  return f;
}

Vec PhsModel::eval_dynamics(const Vec& x, const Vec& u) const {
  Vec f = (interconnection(x) - dissipation(x)) * hamiltonian_gradient(x) + io_matrix(x) * u;
  require_finite(f, "state derivative", x);
  return f;
}

Vec PhsModel::output(const Vec& x) const {
  return io_matrix(x).transpose() * hamiltonian_gradient(x);
}

double PhsModel::dissipated_power(const Vec& x) const {
  const Vec g = hamiltonian_gradient(x);
  return g.dot(dissipation(x) * g);
}

StructureCheck check_structure(const PhsModel& model, const Mat& states) {
  StructureCheck check;
  check.min_dissipation_eig = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < states.cols(); ++k) {
    const Vec x = states.col(k);
    const Mat J = model.interconnection(x);
    const double scale = std::max(1.0, J.cwiseAbs().maxCoeff());
    check.max_skew_error =
        std::max(check.max_skew_error, (J + J.transpose()).cwiseAbs().maxCoeff() / scale);

    const Mat R = model.dissipation(x);
    const double asym = (R - R.transpose()).cwiseAbs().maxCoeff();
    check.min_dissipation_eig =
        std::min(check.min_dissipation_eig, min_symmetric_eigenvalue(R) - asym);

    const Vec grad = model.hamiltonian_gradient(x);
    Vec fd(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
      Vec xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      fd(i) = (model.hamiltonian(xp) - model.hamiltonian(xm)) / (2.0 * h);
    }
    const double denom = std::max(1.0, grad.norm());
    check.max_gradient_error = std::max(check.max_gradient_error, (grad - fd).norm() / denom);
  }
  return check;
}

PhsModel make_linear(const Mat& J, const Mat& R, const Mat& G, const Mat& Q) {
  const auto n = J.rows();
  if (J.cols() != n || R.rows() != n || R.cols() != n || G.rows() != n || Q.rows() != n ||
      Q.cols() != n) {
    throw InvalidArgument("make_linear: inconsistent matrix dimensions");
  }
  PhsModel model;
  model.dim_state = static_cast<int>(n);
  model.dim_input = static_cast<int>(G.cols());
  model.interconnection = [J](const Vec&) { return J; };
  model.dissipation = [R](const Vec&) { return R; };
  model.io_matrix = [G](const Vec&) { return G; };
  model.hamiltonian = [Q](const Vec& x) { return 0.5 * x.dot(Q * x); };
  model.hamiltonian_gradient = [Q](const Vec& x) -> Vec { return Q * x; };
  return model;
}

}  // namespace phslab::phs
