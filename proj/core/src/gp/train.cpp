#include "phslab/gp/train.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <ceres/ceres.h>

namespace phslab::gp {

namespace {

class NlmlObjective final : public ceres::FirstOrderFunction {
 public:
  NlmlObjective(const FilteredDataset& data, const GpHyperparams& base, const TrainerConfig& config)
      : data_(data), base_(base), config_(config), size_(packed_size(base, config.mask)) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const Vec theta = Eigen::Map<const Vec>(parameters, size_);
    if (!theta.allFinite() || theta.cwiseAbs().maxCoeff() > 50.0) return false;
    try {
      const GpHyperparams h = unpack(theta, base_, config_.mask);
      const NlmlValue v = negative_log_marginal_likelihood(data_, h, config_.mask,
                                                           gradient != nullptr, config_.jitter);
      if (!std::isfinite(v.value)) return false;
      *cost = v.value;
      if (gradient != nullptr) {
        if (!v.gradient.allFinite()) return false;
        Eigen::Map<Vec>(gradient, size_) = v.gradient;
      }
      return true;
    } catch (const ConditioningError&) {
      return false;
    } catch (const InvalidArgument&) {
      return false;
    }
  }

  int NumParameters() const override { return size_; }

 private:
  const FilteredDataset& data_;
  const GpHyperparams& base_;
  const TrainerConfig& config_;
  int size_;
};

}  // namespace

TrainingResult optimize_hyperparameters(const FilteredDataset& data, const GpHyperparams& init,
                                        const TrainerConfig& config) {
  init.validate();
  data.validate();
  if (config.restarts < 1) throw InvalidArgument("TrainerConfig: restarts must be >= 1");

  const Vec theta0 = pack(init, config.mask);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  TrainingResult result;
  result.nlml = std::numeric_limits<double>::infinity();
  for (int r = 0; r < config.restarts; ++r) {
    Vec theta = theta0;
    // Draw the perturbation for every restart so restart r always sees the
    // same starting point regardless of earlier failures.
    Vec perturbation(theta0.size());
    for (Eigen::Index i = 0; i < perturbation.size(); ++i) perturbation(i) = normal(rng);
    if (r > 0) theta += config.init_spread * perturbation;

    ceres::GradientProblemSolver::Options options;
    options.line_search_direction_type = ceres::LBFGS;
    options.max_num_iterations = config.max_iterations;
    options.gradient_tolerance = config.gradient_tolerance;
    options.function_tolerance = 1e-12;
    options.parameter_tolerance = 1e-12;
    options.logging_type = ceres::SILENT;
    options.minimizer_progress_to_stdout = false;

    ceres::GradientProblem problem(new NlmlObjective(data, init, config));
    ceres::GradientProblemSolver::Summary summary;
    RestartSummary rs;
    try {
      ceres::Solve(options, problem, theta.data(), &summary);
      rs.iterations = static_cast<int>(summary.iterations.size());
      rs.failed = !summary.IsSolutionUsable() || !std::isfinite(summary.final_cost);
      rs.nlml = summary.final_cost;
      rs.converged = summary.termination_type == ceres::CONVERGENCE;
    } catch (const std::exception&) {
      rs.failed = true;
    }
    if (!rs.failed) {
      const GpHyperparams h = unpack(theta, init, config.mask);
      try {
        const NlmlValue check = negative_log_marginal_likelihood(data, h, config.mask, true,
                                                                 config.jitter);
        rs.nlml = check.value;
        rs.gradient_norm = check.gradient.size() ? check.gradient.cwiseAbs().maxCoeff() : 0.0;
        if (rs.nlml < result.nlml) {
          result.nlml = rs.nlml;
          result.hyper = h;
          result.best_restart = r;
        }
      } catch (const ConditioningError&) {
        rs.failed = true;
      }
    }
    result.restarts.push_back(rs);
  }
  if (result.best_restart < 0) throw TrainingError("all training restarts failed to factorize");
  return result;
}

GpPhsModel train(const FilteredDataset& data, const GpHyperparams& init,
                 const TrainerConfig& config, PosteriorOptions options, TrainingResult* result) {
  TrainingResult r = optimize_hyperparameters(data, init, config);
  GpPhsModel model(r.hyper, data, std::move(options));
  if (result != nullptr) *result = std::move(r);
  return model;
}

}  // namespace phslab::gp
