#pragma once

#include <cstdint>
#include <vector>

#include "phslab/gp/gp_phs_model.hpp"
#include "phslab/gp/likelihood.hpp"

namespace phslab::gp {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainerConfig {
  int restarts = 5;  // includes the run from the unperturbed initial guess
  int max_iterations = 500;
  double gradient_tolerance = 1e-5;  // max-norm in log space
  double init_spread = 0.5;          // std of log-space perturbation per restart
  std::uint64_t seed = 0;
  ParamMask mask;
  double jitter = 0.0;
};

struct RestartSummary {
  double nlml = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool failed = false;
};

struct TrainingResult {
  GpHyperparams hyper;
  double nlml = 0.0;
  std::vector<RestartSummary> restarts;
  int best_restart = -1;
};

/// Minimizes the NLML with L-BFGS in log-hyperparameter space from `init`
/// and `restarts - 1` randomly perturbed copies. Throws TrainingError when
/// every restart fails.
TrainingResult optimize_hyperparameters(const FilteredDataset& data, const GpHyperparams& init,
                                        const TrainerConfig& config = {});

/// optimize_hyperparameters followed by conditioning on the data.
GpPhsModel train(const FilteredDataset& data, const GpHyperparams& init,
                 const TrainerConfig& config = {}, PosteriorOptions options = {},
                 TrainingResult* result = nullptr);

}  // namespace phslab::gp
