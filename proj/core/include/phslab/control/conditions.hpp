#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "phslab/control/reference_plan.hpp"

namespace phslab::control {

struct ConditionSampling {
  int samples_per_radius = 10000;  // random (direction, time) pairs per radius
  int time_samples = 5;            // plan times the samples are drawn from
  double max_radius = 2.0;
  int radial_levels = 40;          // coarse scan from max_radius downwards
  double radius_tolerance = 1e-4;  // bisection resolution for epsilon
  std::uint64_t seed = 0;
};

struct MarginSample {
  double time = 0.0;
  double radius = 0.0;
  Vec error;            // x - x_d
  double dissipation = 0.0;  // grad Hd^T Rd grad Hd
  double worst_perturbation = 0.0;  // sum_i |dHd/dxbar_i| envelope_i
  double margin = 0.0;
  double matching_residual = 0.0;  // |G_perp(...)| off the reference
};

struct ConditionReport {
  std::vector<MarginSample> samples;
  /// Smallest radius beyond which every sample margin is nonnegative;
  /// +inf when the condition fails at max_radius.
  double epsilon = std::numeric_limits<double>::infinity();
  /// Strict dissipation condition: margin >= 0 at every sample.
  bool satisfied = false;
  double min_margin = 0.0;
  double max_worst_perturbation = 0.0;
  double max_matching_residual = 0.0;
  double fraction_negative = 0.0;
  ConditionSampling sampling;
};

/// Worst case of grad^T eta over |eta_i| <= envelope_i subtracted from the
/// dissipation: grad^T Rd grad - sum_i |grad_i| envelope_i.
double worst_case_margin(const Vec& grad, const Mat& Rd, const Vec& envelope);

ConditionReport verify_dissipation_condition(const NominalModel& model,
                                             const DesiredDynamics& desired,
                                             const ReferencePlan& plan,
                                             const ConditionSampling& sampling = {});

/// Key-value summary and margins CSV (t,radius,xbar1..n,dissipation,
/// worst_perturbation,margin,matching_residual).
void write_summary(const std::filesystem::path& path, const ConditionReport& report);
void write_margins_csv(const std::filesystem::path& path, const ConditionReport& report);
/// Reads epsilon/satisfied back from a summary file.
ConditionReport read_summary(const std::filesystem::path& path);

}  // namespace phslab::control
