#include "phslab/control/desired.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <fmt/format.h>

namespace phslab::control {

NominalModel nominal_from_gp(std::shared_ptr<const gp::GpPhsModel> model) {
  if (!model) throw InvalidArgument("nominal_from_gp: null model");
  NominalModel nm;
  nm.dim_state = model->dim_state();
  nm.dim_input = model->dim_input();
  nm.drift = [model](const Vec& x) { return model->drift_mean(x); };
  nm.io_matrix = [model](const Vec& x) { return model->io_matrix(x); };
  nm.envelope = [model](const Vec& x) { return model->error_envelope(x); };
  return nm;
}

NominalModel nominal_from_plant(const phs::PhsModel& plant) {
  NominalModel nm;
  nm.dim_state = plant.dim_state;
  nm.dim_input = plant.dim_input;
  nm.drift = [plant](const Vec& x) { return plant.drift(x); };
  nm.io_matrix = plant.io_matrix;
  const int n = plant.dim_state;
  nm.envelope = [n](const Vec&) { return Vec::Zero(n).eval(); };
  return nm;
}

EnergyFunction energy_of(const phs::PhsModel& plant) {
  return {plant.hamiltonian, plant.hamiltonian_gradient};
}

EnergyFunction energy_of(std::shared_ptr<const gp::GpPhsModel> model) {
  if (!model) throw InvalidArgument("energy_of: null model");
  return {[model](const Vec& x) { return model->hamiltonian(x); },
          [model](const Vec& x) { return model->hamiltonian_gradient(x); }};
}

void DesiredDynamics::check_structure(const Vec& xbar) const {
  const Mat Jd = interconnection(xbar);
  const Mat Rd = damping(xbar);
  const double scale = std::max(1.0, Jd.cwiseAbs().maxCoeff());
  if ((Jd + Jd.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("desired dynamics: Jd is not skew-symmetric");
  }
  const Mat off = Rd - Mat(Rd.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() > 0.0 || Rd.diagonal().minCoeff() < 0.0) {
    throw InvalidArgument("desired dynamics: Rd must be diagonal with nonnegative entries");
  }
}

DesiredDynamics shifted_energy_target(const Mat& Jd, const Mat& Rd, EnergyFunction H,
                                      const Vec& shift) {
  const auto n = Jd.rows();
  if (Jd.cols() != n || Rd.rows() != n || Rd.cols() != n || shift.size() != n) {
    throw InvalidArgument("shifted_energy_target: dimension mismatch");
  }
  if (!H.value || !H.gradient) throw InvalidArgument("shifted_energy_target: empty energy");
  DesiredDynamics d;
  d.interconnection = [Jd](const Vec&) { return Jd; };
  d.damping = [Rd](const Vec&) { return Rd; };
  const double h0 = H.value(shift);
  if (!std::isfinite(h0)) throw ModelEvaluationError("shifted_energy_target: H(shift) not finite");
  d.energy = [H, shift, h0](const Vec& x, const Vec& xd) { return H.value(x - xd + shift) - h0; };
  d.energy_gradient = [H, shift](const Vec& x, const Vec& xd) {
    return H.gradient(x - xd + shift);
  };
  d.check_structure(Vec::Zero(n));
  return d;
}

std::pair<Mat, Mat> microactuator_target_structure(double b_hat, double rd_inverse) {
  if (!(b_hat >= 0.0) || !(rd_inverse >= 0.0)) {
    throw InvalidArgument("microactuator_target_structure: damping must be nonnegative");
  }
  Mat Jd = Mat::Zero(3, 3);
  Jd(0, 1) = 1.0;
  Jd(1, 0) = -1.0;
  Mat Rd = Mat::Zero(3, 3);
  Rd(1, 1) = b_hat;
  Rd(2, 2) = rd_inverse;
  return {Jd, Rd};
}

namespace {

Mat fd_hessian(const EnergyFunction& H, const Vec& x) {
  const auto n = x.size();
  Mat Hs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
    Vec xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    Hs.col(i) = (H.gradient(xp) - H.gradient(xm)) / (2.0 * h);
  }
  return 0.5 * (Hs + Hs.transpose());
}

}  // namespace

Vec minimize_energy(const EnergyFunction& H, const Vec& seed, double tolerance) {
  Vec x = seed;
  double f = H.value(x);
  for (int it = 0; it < 200; ++it) {
    const Vec g = H.gradient(x);
    if (!g.allFinite()) throw ModelEvaluationError("minimize_energy: non-finite gradient");
    if (g.cwiseAbs().maxCoeff() <= tolerance) return x;
    // Newton direction when the Hessian is positive definite, steepest
    // descent otherwise.
    Vec dir = -g;
    bool newton = false;
    Eigen::LLT<Mat> llt(fd_hessian(H, x));
    if (llt.info() == Eigen::Success) {
      const Vec nd = -llt.solve(g);
      if (nd.allFinite() && nd.dot(g) < 0.0) {
        dir = nd;
        newton = true;
      }
    }
    // Close to the minimum H only changes at round-off level, so a Newton
    // step is also accepted when it shrinks the gradient.
    const double gnorm = g.norm();
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      const Vec trial = x + step * dir;
      const double ft = H.value(trial);
      if (!std::isfinite(ft)) continue;
      const bool decrease = ft < f && ft <= f + 1e-4 * step * g.dot(dir);
      const bool flatter = newton && H.gradient(trial).norm() < 0.5 * gnorm;
      if (decrease || flatter) {
        x = trial;
        f = ft;
        moved = true;
        break;
      }
    }
    if (!moved) {
      // No sufficient decrease left at machine precision; accept only if the
      // gradient is already small in a relative sense.
      if (g.cwiseAbs().maxCoeff() <= 1e3 * tolerance) return x;
      throw ModelEvaluationError(fmt::format(
          "minimize_energy: line search failed with gradient norm {:.3g}", g.norm()));
    }
  }
  throw ModelEvaluationError("minimize_energy: no convergence in 200 iterations");
}

HdValidation validate_hd_minimum(const DesiredDynamics& desired, const Vec& xd, const Vec& lower,
                                 const Vec& upper, int resolution) {
  const auto n = xd.size();
  if (lower.size() != n || upper.size() != n || resolution < 2) {
    throw InvalidArgument("validate_hd_minimum: bad box or resolution");
  }
  Eigen::Index total = 1;
  for (Eigen::Index i = 0; i < n; ++i) total *= resolution;

  HdValidation out;
  double best = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  double nearest_dist = std::numeric_limits<double>::infinity();
  Vec p(n);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (Eigen::Index k = 0; k < total; ++k) {
    Eigen::Index rest = k;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto j = rest % resolution;
      rest /= resolution;
      p(i) = lower(i) + (upper(i) - lower(i)) * static_cast<double>(j) / (resolution - 1);
    }
    const double v = desired.energy(xd + p, xd);
    if (!std::isfinite(v)) continue;
    if (v < best) {
      second = best;
      best = v;
      out.argmin = p;
    } else if (v < second) {
      second = v;
    }
    const double d = p.norm();
    if (d < nearest_dist) {
      nearest_dist = d;
      out.nearest_to_zero = p;
    }
  }
  out.min_value = best;
  out.gap = second - best;
  out.passed = out.argmin.size() == n && (out.argmin - out.nearest_to_zero).norm() == 0.0 &&
               out.gap > 0.0;
  return out;
}

}  // namespace phslab::control
