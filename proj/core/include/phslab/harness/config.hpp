#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "phslab/common.hpp"

namespace phslab::harness {

/// Invalid, incomplete or unparsable experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlantConfig {
  std::string model = "microactuator";
  double mass = 1.0;
  double damping = 0.5;
  double stiffness = 10.0;
  double resistance = 1.0;
  double rest_gap = 1.0;
  double c0 = 1.0;
  bool half_electrical_energy = false;
};

struct ExcitationConfig {
  double amplitude = 1.0;
  double frequency = 1.0;
  double phase = 0.0;
  Vec initial_state = (Vec(3) << 0.0, 0.0, 1.0).finished();
};

struct DatasetConfig {
  int samples = 300;
  double t0 = 0.0;
  double t1 = 20.0;
  double noise_variance = 0.001;
};

struct FilterConfig {
  int window = 9;
  int order = 3;
};

struct TrainingConfig {
  /// "gp" trains a GP-PHS; "perfect" bypasses learning and uses the exact
  /// plant as nominal model (zero error envelope).
  std::string mode = "gp";
  int restarts = 5;
  int max_iterations = 500;
  double gradient_tolerance = 1e-5;
  double init_spread = 0.5;
  double signal_std = 1.0;
  double lengthscale = 1.0;
  double noise_variance = 0.01;
  double damping = 1.0;
  double resistance = 1.0;
  double beta = 1.0;
  double risk = 0.01;
  std::string bound_scale = "variance";          // variance | stddev
  std::string hamiltonian_mode = "closed_form";  // closed_form | line_integral
};

struct DesiredConfig {
  double rd_inverse = 10.0;
  /// Damping b_hat in Rd; empty means the trained (or exact) value.
  std::optional<double> b_hat;
  std::string hamiltonian = "shifted";  // shifted | literal
  double validate_lower = -2.0;
  double validate_upper = 2.0;
  int validate_resolution = 21;
};

struct ReferenceConfig {
  double rest_gap = 1.0;
  double slope = 0.01;
  double amplitude = 0.01;
  double frequency = 0.8;
  double t0 = 0.0;
  double t1 = 13.0;
  /// Plan grid step; empty means the dataset sampling interval.
  std::optional<double> grid_step;
  Vec seed_state = (Vec(3) << 1.0, 0.0, 0.1).finished();
  /// What to do where the matching equation has no root: "error" aborts
  /// the plan stage, "least_squares" keeps the closest point and reports
  /// the residual.
  std::string infeasible = "error";
};

struct ClosedLoopConfig {
  double t1 = 13.0;
  int samples = 1301;
  Vec perturbation = (Vec(3) << 0.05, 0.0, 0.0).finished();
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double increase_tolerance = 1e-6;
};

struct VerifyConfig {
  int samples_per_radius = 10000;
  int time_samples = 5;
  double max_radius = 2.0;
  int radial_levels = 20;
  double radius_tolerance = 1e-3;
};

struct ExperimentConfig {
  PlantConfig plant;
  ExcitationConfig excitation;
  DatasetConfig dataset;
  FilterConfig filter;
  TrainingConfig training;
  DesiredConfig desired;
  ReferenceConfig reference;
  ClosedLoopConfig closed_loop;
  VerifyConfig verify;
  std::optional<std::uint64_t> seed;
  std::string name = "experiment";

  /// Throws ConfigError naming the first violated bound. A missing seed is
  /// an error.
  void validate() const;
  /// Sampling interval of the dataset grid.
  [[nodiscard]] double dataset_step() const;
  [[nodiscard]] double plan_step() const;
};

/// INI-style text: `[section]` headers and `key = value` lines; `;` and `#`
/// start comments. Unknown sections or keys are errors.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Applies `section.key=value`.
void apply_override(ExperimentConfig& config, const std::string& assignment);

/// All `section.key` names in canonical order.
std::vector<std::string> config_keys();

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace phslab::harness
