#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "phslab/harness/config.hpp"

namespace phslab::harness {

struct MetricsReport {
  static constexpr int schema_version = 1;

  std::vector<double> max_abs_error;   // per state, closed loop vs plan
  std::vector<double> mean_abs_error;
  int hd_increase_events = 0;
  double hd_increase_tolerance = 0.0;
  double hd_max_increase = 0.0;
  double hd_initial = 0.0;
  double hd_final = 0.0;
  double closed_loop_horizon = 0.0;
  double open_loop_energy_residual = 0.0;    // max per-interval balance residual
  double closed_loop_energy_residual = 0.0;
  /// Empty when the condition fails at every sampled radius.
  std::optional<double> epsilon;
  bool condition_satisfied = false;
  double condition_min_margin = 0.0;
  double condition_fraction_negative = 0.0;
  double offreference_matching_residual = 0.0;
  bool hd_validation_passed = false;
  double hd_validation_gap = 0.0;
  double plan_max_matching_residual = 0.0;
  double plan_derivative_mismatch = 0.0;
  std::map<std::string, double> timings;  // seconds per stage; written separately
};

/// Recomputes the metrics from the artifacts in `out`. Throws StageError
/// ("report") naming a missing artifact.
MetricsReport compute_metrics(const ExperimentConfig& config, const std::filesystem::path& out);

void write_metrics_json(const std::filesystem::path& path, const MetricsReport& report);
MetricsReport read_metrics_json(const std::filesystem::path& path);
void write_timings_json(const std::filesystem::path& path, const MetricsReport& report);

/// Human-readable summary.
std::string summarize(const MetricsReport& report);

}  // namespace phslab::harness
