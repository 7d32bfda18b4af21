#include "phslab/control/reference_plan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <fmt/format.h>

#include "phslab/linalg.hpp"

namespace phslab::control {

namespace {

using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

// Cubic B-spline with end slopes from fourth-order one-sided differences.
// (The library's own end-slope estimate is much less accurate at the right
// end.) The spline stays linear in the data.
Spline make_spline(const double* f, std::size_t size, double t0, double h) {
  const std::size_t n = size - 1;
  const double left = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h);
  const double right =
      (25 * f[n] - 48 * f[n - 1] + 36 * f[n - 2] - 16 * f[n - 3] + 3 * f[n - 4]) / (12 * h);
  return {f, size, t0, h, left, right};
}

std::vector<Spline> build_splines(const Mat& values, double t0, double h) {
  std::vector<Spline> out;
  out.reserve(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    const Vec row = values.row(i).transpose();
    out.push_back(make_spline(row.data(), static_cast<std::size_t>(row.size()), t0, h));
  }
  return out;
}

}  // namespace

ReferencePlan::ReferencePlan(std::vector<double> times, Mat states, Mat derivatives)
    : times_(std::move(times)), states_(std::move(states)), derivatives_(std::move(derivatives)) {
  const auto k = static_cast<Eigen::Index>(times_.size());
  if (k < 5) throw InvalidArgument("ReferencePlan: need at least 5 grid points");
  if (states_.cols() != k || derivatives_.cols() != k || derivatives_.rows() != states_.rows()) {
    throw InvalidArgument("ReferencePlan: matrix shapes do not match the grid");
  }
  if (!states_.allFinite() || !derivatives_.allFinite()) {
    throw InvalidArgument("ReferencePlan: non-finite entries");
  }
  step_ = (times_.back() - times_.front()) / static_cast<double>(k - 1);
  if (!(step_ > 0.0)) throw InvalidArgument("ReferencePlan: times must increase");
  for (Eigen::Index i = 0; i < k; ++i) {
    const double expected = times_.front() + static_cast<double>(i) * step_;
    if (std::abs(times_[static_cast<std::size_t>(i)] - expected) > 1e-9 * std::max(1.0, step_)) {
      throw InvalidArgument("ReferencePlan: grid must be uniform");
    }
  }
  state_splines_ = build_splines(states_, times_.front(), step_);
  derivative_splines_ = build_splines(derivatives_, times_.front(), step_);
}

void ReferencePlan::check_range(double t) const {
  const double slack = 1e-9 * std::max(1.0, std::abs(t_end()));
  if (!(t >= t_begin() - slack && t <= t_end() + slack)) {
    throw PlanRangeError(
        fmt::format("reference plan queried at t = {} outside [{}, {}]", t, t_begin(), t_end()));
  }
}

Vec ReferencePlan::state(double t) const {
  check_range(t);
  t = std::clamp(t, t_begin(), t_end());
  Vec out(dim_state());
  for (int i = 0; i < dim_state(); ++i) out(i) = state_splines_[static_cast<std::size_t>(i)](t);
  return out;
}

Vec ReferencePlan::derivative(double t) const {
  check_range(t);
  t = std::clamp(t, t_begin(), t_end());
  Vec out(dim_state());
  for (int i = 0; i < dim_state(); ++i) {
    out(i) = derivative_splines_[static_cast<std::size_t>(i)](t);
  }
  return out;
}

Vec ReferencePlan::state_spline_derivative(double t) const {
  check_range(t);
  t = std::clamp(t, t_begin(), t_end());
  Vec out(dim_state());
  for (int i = 0; i < dim_state(); ++i) {
    out(i) = state_splines_[static_cast<std::size_t>(i)].prime(t);
  }
  return out;
}

void write_csv(std::ostream& os, const ReferencePlan& plan) {
  const int n = plan.dim_state();
  std::string header = "t";
  for (int i = 1; i <= n; ++i) header += fmt::format(",xd{}", i);
  for (int i = 1; i <= n; ++i) header += fmt::format(",xddot{}", i);
  os << header << '\n';
  for (std::size_t k = 0; k < plan.times().size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    std::string row = fmt::format("{:.17g}", plan.times()[k]);
    for (int i = 0; i < n; ++i) row += fmt::format(",{:.17g}", plan.states()(i, c));
    for (int i = 0; i < n; ++i) row += fmt::format(",{:.17g}", plan.derivatives()(i, c));
    os << row << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const ReferencePlan& plan) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(os, plan);
}

ReferencePlan read_plan_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("plan CSV: empty input");
  const auto columns = std::count(line.begin(), line.end(), ',') + 1;
  if (columns < 3 || (columns - 1) % 2 != 0 || line.rfind("t,xd1", 0) != 0) {
    throw InvalidArgument("plan CSV: unexpected header '" + line + "'");
  }
  const auto n = static_cast<Eigen::Index>((columns - 1) / 2);
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidArgument("plan CSV: cannot parse '" + cell + "'");
      }
    }
    if (static_cast<long>(row.size()) != columns) {
      throw InvalidArgument(fmt::format("plan CSV: row {} has {} fields, expected {}",
                                        rows.size() + 2, row.size(), columns));
    }
    times.push_back(row[0]);
    rows.push_back(std::move(row));
  }
  const auto k = static_cast<Eigen::Index>(rows.size());
  Mat states(n, k), derivs(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto& r = rows[static_cast<std::size_t>(c)];
    for (Eigen::Index i = 0; i < n; ++i) {
      states(i, c) = r[static_cast<std::size_t>(1 + i)];
      derivs(i, c) = r[static_cast<std::size_t>(1 + n + i)];
    }
  }
  return {std::move(times), std::move(states), std::move(derivs)};
}

ReferencePlan read_plan_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_plan_csv(is);
}

PrimaryReference air_gap_reference(double rest_gap, double slope, double amplitude,
                                   double frequency) {
  PrimaryReference ref;
  ref.components = {0};
  ref.value = [=](double t) {
    Vec v(1);
    v(0) = rest_gap - slope * t - amplitude * std::sin(frequency * t);
    return v;
  };
  ref.derivative = [=](double t) {
    Vec v(1);
    v(0) = -slope - amplitude * frequency * std::cos(frequency * t);
    return v;
  };
  return ref;
}

Vec matching_residual(const NominalModel& model, const DesiredDynamics& desired, const Vec& x,
                      const Vec& xd, const Vec& xd_dot) {
  const Vec xbar = x - xd;
  const Vec target =
      (desired.interconnection(xbar) - desired.damping(xbar)) * desired.energy_gradient(x, xd);
  const Mat Gp = left_annihilator(model.io_matrix(x));
  return Gp * (model.drift(x) - target - xd_dot);
}

Vec matching_residual(const NominalModel& model, const DesiredDynamics& desired,
                      const ReferencePlan& plan, const Vec& x, double t) {
  return matching_residual(model, desired, x, plan.state(t), plan.derivative(t));
}

namespace {

/// Collocation problem for the reference: primary components and their
/// derivatives are given; solved components live in z (node-major).
struct Collocation {
  const NominalModel& model;
  const DesiredDynamics& desired;
  std::vector<int> primary;
  std::vector<int> solved;
  std::vector<double> times;
  Mat primary_values;       // m x K
  Mat primary_derivatives;  // m x K
  Mat D;                    // K x K spline node-derivative operator
  Mat annihilator_ref;

  [[nodiscard]] int n() const { return model.dim_state; }
  [[nodiscard]] int s() const { return static_cast<int>(solved.size()); }
  [[nodiscard]] int K() const { return static_cast<int>(times.size()); }

  [[nodiscard]] Vec node_state(const Vec& z, int k) const {
    Vec x(n());
    for (std::size_t i = 0; i < primary.size(); ++i) {
      x(primary[i]) = primary_values(static_cast<Eigen::Index>(i), k);
    }
    for (int j = 0; j < s(); ++j) x(solved[static_cast<std::size_t>(j)]) = z(k * s() + j);
    return x;
  }

  [[nodiscard]] Mat solved_derivatives(const Vec& z) const {
    // zs(j, k) = z(k s + j); derivatives along time are zs * D^T.
    const Eigen::Map<const Mat> zs(z.data(), s(), K());
    return zs * D.transpose();
  }

  [[nodiscard]] Vec node_derivative(const Mat& sd, int k) const {
    Vec xdot(n());
    for (std::size_t i = 0; i < primary.size(); ++i) {
      xdot(primary[i]) = primary_derivatives(static_cast<Eigen::Index>(i), k);
    }
    for (int j = 0; j < s(); ++j) xdot(solved[static_cast<std::size_t>(j)]) = sd(j, k);
    return xdot;
  }

  [[nodiscard]] Mat annihilator(const Vec& x) const {
    return left_annihilator(model.io_matrix(x), &annihilator_ref);
  }

  // G_perp (mu - F) at the reference itself (xbar = 0), without the xdot term.
  [[nodiscard]] Vec local_part(const Vec& x, const Mat& Gp) const {
    const Vec zero = Vec::Zero(n());
    const Vec target =
        (desired.interconnection(zero) - desired.damping(zero)) * desired.energy_gradient(x, x);
    return Gp * (model.drift(x) - target);
  }

  [[nodiscard]] Vec node_residual(const Vec& x, const Vec& xdot) const {
    const Mat Gp = annihilator(x);
    return local_part(x, Gp) - Gp * xdot;
  }

  // d(node_residual)/d(solved components of x) at fixed xdot.
  [[nodiscard]] Mat node_jacobian(const Vec& x, const Vec& xdot) const {
    Mat Jl(n() - static_cast<int>(primary.size()), s());
    for (int j = 0; j < s(); ++j) {
      const int c = solved[static_cast<std::size_t>(j)];
      const double h = 1e-6 * std::max(1.0, std::abs(x(c)));
      Vec xp = x, xm = x;
      xp(c) += h;
      xm(c) -= h;
      Jl.col(j) = (node_residual(xp, xdot) - node_residual(xm, xdot)) / (2.0 * h);
    }
    return Jl;
  }

  [[nodiscard]] Vec residual(const Vec& z) const {
    const Mat sd = solved_derivatives(z);
    const int r = n() - static_cast<int>(primary.size());
    Vec out(r * K());
    for (int k = 0; k < K(); ++k) {
      out.segment(k * r, r) = node_residual(node_state(z, k), node_derivative(sd, k));
    }
    return out;
  }

  [[nodiscard]] Mat jacobian(const Vec& z) const {
    const Mat sd = solved_derivatives(z);
    const int r = n() - static_cast<int>(primary.size());
    Mat J = Mat::Zero(r * K(), s() * K());
    for (int k = 0; k < K(); ++k) {
      const Vec x = node_state(z, k);
      const Vec xdot = node_derivative(sd, k);
      J.block(k * r, k * s(), r, s()) += node_jacobian(x, xdot);
      const Mat Gp = annihilator(x);
      for (int j = 0; j < s(); ++j) {
        const Vec col = Gp.col(solved[static_cast<std::size_t>(j)]);
        for (int kk = 0; kk < K(); ++kk) {
          const double d = D(k, kk);
          if (d != 0.0) J.block(k * r, kk * s() + j, r, 1) -= d * col;
        }
      }
    }
    return J;
  }
};

Mat spline_derivative_operator(int K, double t0, double h) {
  Mat D(K, K);
  std::vector<double> unit(static_cast<std::size_t>(K), 0.0);
  for (int c = 0; c < K; ++c) {
    unit[static_cast<std::size_t>(c)] = 1.0;
    const Spline sp = make_spline(unit.data(), unit.size(), t0, h);
    for (int k = 0; k < K; ++k) D(k, c) = sp.prime(t0 + k * h);
    unit[static_cast<std::size_t>(c)] = 0.0;
  }
  // Remove rounding noise so the sparsity pattern is exploited above.
  for (Eigen::Index i = 0; i < D.size(); ++i) {
    if (std::abs(D.data()[i]) < 1e-14 / h) D.data()[i] = 0.0;
  }
  return D;
}

// Damped Newton on a square system; returns the final max-norm residual.
template <class ResidualFn, class JacobianFn>
double damped_newton(Vec& z, const ResidualFn& residual, const JacobianFn& jacobian,
                     double tolerance, int max_iterations) {
  Vec r = residual(z);
  double norm = r.cwiseAbs().maxCoeff();
  for (int it = 0; it < max_iterations && norm > tolerance; ++it) {
    const Mat J = jacobian(z);
    Eigen::PartialPivLU<Mat> lu(J);
    const Vec dz = -lu.solve(r);
    if (!dz.allFinite()) break;
    double step = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
      const Vec trial = z + step * dz;
      Vec rt;
      try {
        rt = residual(trial);
      } catch (const ModelEvaluationError&) {
        continue;
      }
      if (!rt.allFinite()) continue;
      const double nt = rt.cwiseAbs().maxCoeff();
      if (nt < norm || nt <= tolerance) {
        z = trial;
        r = rt;
        norm = nt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return norm;
}

// Levenberg-Marquardt on |r|^2; returns the final max-norm residual, which
// stays positive when the system has no root.
template <class ResidualFn, class JacobianFn>
double levenberg_marquardt(Vec& z, const ResidualFn& residual, const JacobianFn& jacobian,
                           double tolerance, int max_iterations) {
  Vec r = residual(z);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int it = 0; it < max_iterations && r.cwiseAbs().maxCoeff() > tolerance; ++it) {
    const Mat J = jacobian(z);
    const Mat A = J.transpose() * J;
    const Vec g = J.transpose() * r;
    bool accepted = false;
    for (int inner = 0; inner < 30 && !accepted; ++inner) {
      Mat M = A;
      M.diagonal() += lambda * (A.diagonal().array() + 1e-12).matrix();
      const Vec dz = -M.ldlt().solve(g);
      if (!dz.allFinite()) {
        lambda *= 4.0;
        continue;
      }
      const Vec trial = z + dz;
      Vec rt;
      try {
        rt = residual(trial);
      } catch (const ModelEvaluationError&) {
        lambda *= 4.0;
        continue;
      }
      const double ct = rt.squaredNorm();
      if (rt.allFinite() && ct < cost) {
        const bool stalled = cost - ct <= 1e-15 * cost;
        z = trial;
        r = rt;
        cost = ct;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (stalled) return r.cwiseAbs().maxCoeff();
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) break;
  }
  return r.cwiseAbs().maxCoeff();
}

}  // namespace

ReferencePlan solve_reference_plan(const NominalModel& model, const DesiredDynamics& desired,
                                   const PrimaryReference& primary, const PlanOptions& options) {
  const int n = model.dim_state;
  const int m = model.dim_input;
  if (static_cast<int>(primary.components.size()) != m) {
    throw InvalidArgument("solve_reference_plan: need one prescribed component per input");
  }
  if (options.seed_state.size() != n) {
    throw InvalidArgument("solve_reference_plan: seed state has the wrong dimension");
  }
  if (!(options.t1 > options.t0) || !(options.grid_step > 0.0)) {
    throw InvalidArgument("solve_reference_plan: bad time interval or grid step");
  }
  const int K =
      std::max(5, static_cast<int>(std::ceil((options.t1 - options.t0) / options.grid_step - 1e-9)) + 1);
  const double h = (options.t1 - options.t0) / (K - 1);

  Collocation col{model, desired, primary.components, {}, {}, Mat(m, K), Mat(m, K), {}, {}};
  for (int i = 0; i < n; ++i) {
    if (std::find(primary.components.begin(), primary.components.end(), i) ==
        primary.components.end()) {
      col.solved.push_back(i);
    }
  }
  if (static_cast<int>(col.solved.size()) != n - m) {
    throw InvalidArgument("solve_reference_plan: prescribed components must be distinct");
  }
  for (int k = 0; k < K; ++k) {
    const double t = options.t0 + k * h;
    col.times.push_back(t);
    col.primary_values.col(k) = primary.value(t);
    col.primary_derivatives.col(k) = primary.derivative(t);
  }
  col.D = spline_derivative_operator(K, options.t0, h);
  col.annihilator_ref = left_annihilator(model.io_matrix(options.seed_state));

  const int s = n - m;
  Vec z(s * K);

  // Sequential sweep: node by node with the unknown derivatives set to zero,
  // warm-started from the previous node.
  Vec guess(s);
  for (int j = 0; j < s; ++j) guess(j) = options.seed_state(col.solved[static_cast<std::size_t>(j)]);
  for (int k = 0; k < K; ++k) {
    Vec xdot_fixed = Vec::Zero(n);
    for (int i = 0; i < m; ++i) {
      xdot_fixed(primary.components[static_cast<std::size_t>(i)]) = col.primary_derivatives(i, k);
    }
    auto node_x = [&](const Vec& g) {
      Vec x(n);
      for (int i = 0; i < m; ++i) x(primary.components[static_cast<std::size_t>(i)]) = col.primary_values(i, k);
      for (int j = 0; j < s; ++j) x(col.solved[static_cast<std::size_t>(j)]) = g(j);
      return x;
    };
    auto node_residual = [&](const Vec& v) { return col.node_residual(node_x(v), xdot_fixed); };
    auto node_jacobian = [&](const Vec& v) { return col.node_jacobian(node_x(v), xdot_fixed); };
    // The sweep only seeds the joint solve below: a node whose equation has
    // no root on its own (the unknown derivatives are frozen at zero here)
    // keeps its least-squares point. The warm start can also sit on a
    // stationary point of |r|^2 where a root only just appeared, so the
    // seed state is tried as a second start.
    Vec g = guess;
    double res = levenberg_marquardt(g, node_residual, node_jacobian, options.tolerance,
                                     4 * options.max_iterations);
    if (res > options.tolerance) {
      Vec alt(s);
      for (int j = 0; j < s; ++j) alt(j) = options.seed_state(col.solved[static_cast<std::size_t>(j)]);
      const double alt_res = levenberg_marquardt(alt, node_residual, node_jacobian,
                                                 options.tolerance, 4 * options.max_iterations);
      if (alt_res < res) {
        g = alt;
        res = alt_res;
      }
    }
    if (!g.allFinite()) {
      throw PlanError(fmt::format("reference plan: node solve diverged near t = {:.6g}",
                                  col.times[static_cast<std::size_t>(k)]),
                      col.times[static_cast<std::size_t>(k)], res);
    }
    z.segment(k * s, s) = g;
    guess = g;
  }

  auto residual = [&](const Vec& v) { return col.residual(v); };
  auto jacobian = [&](const Vec& v) { return col.jacobian(v); };
  if (options.least_squares) {
    levenberg_marquardt(z, residual, jacobian, options.tolerance, 4 * options.max_iterations);
    if (!z.allFinite()) {
      throw PlanError("reference plan: least-squares collocation diverged", options.t0,
                      std::numeric_limits<double>::infinity());
    }
  } else {
    const double res =
        damped_newton(z, residual, jacobian, options.tolerance, options.max_iterations);
    if (!(res <= std::max(options.tolerance, 1e-8))) {
      const Vec r = col.residual(z);
      Eigen::Index worst = 0;
      r.cwiseAbs().maxCoeff(&worst);
      const double t = col.times[static_cast<std::size_t>(worst / s)];
      throw PlanError(fmt::format("reference plan: collocation did not converge (max residual "
                                  "{:.3g} at t = {:.6g})", res, t),
                      t, res);
    }
  }

  Mat states(n, K), derivs(n, K);
  const Mat sd = col.solved_derivatives(z);
  for (int k = 0; k < K; ++k) {
    states.col(k) = col.node_state(z, k);
    derivs.col(k) = col.node_derivative(sd, k);
  }
  return {col.times, std::move(states), std::move(derivs)};
}

}  // namespace phslab::control
