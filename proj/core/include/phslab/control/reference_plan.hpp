#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "phslab/control/desired.hpp"

namespace phslab::control {

class PlanRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Full-state reference x_d(t) and its derivative on a uniform grid, with
/// cubic B-spline interpolants for both.
class ReferencePlan {
 public:
  ReferencePlan(std::vector<double> times, Mat states, Mat derivatives);

  [[nodiscard]] Vec state(double t) const;
  [[nodiscard]] Vec derivative(double t) const;
  /// Time derivative of the state interpolant (not of the stored derivative
  /// samples); used to check their consistency.
  [[nodiscard]] Vec state_spline_derivative(double t) const;

  [[nodiscard]] const std::vector<double>& times() const { return times_; }
  [[nodiscard]] const Mat& states() const { return states_; }
  [[nodiscard]] const Mat& derivatives() const { return derivatives_; }
  [[nodiscard]] double t_begin() const { return times_.front(); }
  [[nodiscard]] double t_end() const { return times_.back(); }
  [[nodiscard]] double step() const { return step_; }
  [[nodiscard]] int dim_state() const { return static_cast<int>(states_.rows()); }

 private:
  void check_range(double t) const;

  std::vector<double> times_;
  Mat states_;
  Mat derivatives_;
  double step_ = 0.0;
  std::vector<boost::math::interpolators::cardinal_cubic_b_spline<double>> state_splines_;
  std::vector<boost::math::interpolators::cardinal_cubic_b_spline<double>> derivative_splines_;
};

/// CSV t,xd1..xdn,xddot1..xddotn with 17 significant digits.
void write_csv(std::ostream& os, const ReferencePlan& plan);
void write_csv(const std::filesystem::path& path, const ReferencePlan& plan);
ReferencePlan read_plan_csv(std::istream& is);
ReferencePlan read_plan_csv(const std::filesystem::path& path);

/// Prescribed components of the reference (one per input).
struct PrimaryReference {
  std::vector<int> components;
  std::function<Vec(double)> value;
  std::function<Vec(double)> derivative;
};

/// x_d1(t) = x1s - slope t - amplitude sin(frequency t).
PrimaryReference air_gap_reference(double rest_gap = 1.0, double slope = 0.01,
                                   double amplitude = 0.01, double frequency = 0.8);

struct PlanOptions {
  double t0 = 0.0;
  double t1 = 13.0;
  double grid_step = 20.0 / 299.0;
  /// Initial guess for the full state at t0 (selects the solution branch).
  Vec seed_state;
  double tolerance = 1e-10;
  int max_iterations = 50;
  /// Where the matching equation has no root (the learned model cannot
  /// realize the reference), keep the least-squares point instead of
  /// throwing PlanError. The residual left over is the caller's to report.
  bool least_squares = false;
};

class PlanError : public std::runtime_error {
 public:
  PlanError(const std::string& what, double time, double residual)
      : std::runtime_error(what), time_(time), residual_(residual) {}
  [[nodiscard]] double time() const { return time_; }
  [[nodiscard]] double residual() const { return residual_; }

 private:
  double time_;
  double residual_;
};

/// G_perp(x) (mu(x) - [Jd - Rd] grad_xbar Hd(x, xd) - xd_dot).
Vec matching_residual(const NominalModel& model, const DesiredDynamics& desired, const Vec& x,
                      const Vec& xd, const Vec& xd_dot);
Vec matching_residual(const NominalModel& model, const DesiredDynamics& desired,
                      const ReferencePlan& plan, const Vec& x, double t);

/// Solves the modified matching equation along the reference for the
/// non-prescribed components. The derivatives of solved components are the
/// node derivatives of their cubic spline, so the system is solved jointly
/// over the whole grid by damped Newton, seeded by a sequential per-node
/// Newton sweep warm-started from the previous node. In least-squares mode
/// both phases use Levenberg-Marquardt on the squared residual.
ReferencePlan solve_reference_plan(const NominalModel& model, const DesiredDynamics& desired,
                                   const PrimaryReference& primary, const PlanOptions& options);

}  // namespace phslab::control
