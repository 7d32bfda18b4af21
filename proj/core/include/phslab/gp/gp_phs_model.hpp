#pragma once

#include <optional>

#include "phslab/gp/filter.hpp"
#include "phslab/gp/hyperparams.hpp"
#include "phslab/gp/phs_kernel.hpp"

namespace phslab::gp {

/// How the probabilistic error bound scales with the posterior spread.
/// `variance` multiplies beta by var (as printed in the bound we implement),
/// `stddev` by sqrt(var).
enum class BoundScale { variance, stddev };

/// Realization of the Hamiltonian posterior mean.
///  closed_form:   exact GP conditional mean of the latent H
///  line_integral: solve J_R g = mu for grad H, integrate g along the segment
///                 from the reference state
enum class HamiltonianMode { closed_form, line_integral };

struct PosteriorOptions {
  Vec beta;            // per-dimension error scale; empty means all ones
  double risk = 0.01;  // p in (0, 1)
  BoundScale bound_scale = BoundScale::variance;
  HamiltonianMode hamiltonian_mode = HamiltonianMode::closed_form;
  /// State with H_hat(x_ref) = 0; defaults to the mean training state.
  std::optional<Vec> reference_state;
  double jitter = 0.0;
};

struct Prediction {
  Vec mean;      // mu(xdot | x, D) + G_hat(x) u
  Vec variance;  // diag var(xdot | x, D), nonnegative
};

/// Trained GP-PHS: conditions the PHS-structured GP on a dataset.
/// Immutable after construction; posterior queries are thread safe.
class GpPhsModel {
 public:
  GpPhsModel(GpHyperparams hyper, FilteredDataset data, PosteriorOptions options = {});

  /// Posterior mean of the drift, mu(xdot | x, D), excluding G_hat u.
  [[nodiscard]] Vec drift_mean(const Vec& x) const;
  /// Drift mean computed by the generic route k_*^T K^{-1} y (no
  /// factoring through J_R); used by the line-integral realization.
  [[nodiscard]] Vec drift_mean_direct(const Vec& x) const;
  [[nodiscard]] Vec drift_variance(const Vec& x) const;
  [[nodiscard]] Prediction predict(const Vec& x, const Vec& u) const;

  /// Pinned posterior mean H_hat(x) - H_hat(x_ref).
  [[nodiscard]] double hamiltonian(const Vec& x) const;
  /// grad H_hat(x); satisfies drift_mean(x) = J_R(x) grad H_hat(x).
  [[nodiscard]] Vec hamiltonian_gradient(const Vec& x) const;

  /// Per-dimension bound beta_i * var_i (or beta_i * sqrt(var_i)).
  [[nodiscard]] Vec error_envelope(const Vec& x) const;
  [[nodiscard]] Vec envelope_from_variance(const Vec& variance) const;

  [[nodiscard]] Mat io_matrix(const Vec& x) const { return hyper_.structure.io_matrix(x); }
  [[nodiscard]] Mat structure(const Vec& x) const { return hyper_.structure.structure(x); }

  [[nodiscard]] const GpHyperparams& hyper() const { return hyper_; }
  [[nodiscard]] const FilteredDataset& data() const { return data_; }
  [[nodiscard]] const PosteriorOptions& options() const { return options_; }
  [[nodiscard]] const Vec& mean_adjusted() const { return y_; }
  [[nodiscard]] const Vec& reference_state() const { return x_ref_; }
  [[nodiscard]] double jitter() const { return factor_.jitter; }
  [[nodiscard]] int dim_state() const { return hyper_.dim_state(); }
  [[nodiscard]] int dim_input() const { return hyper_.structure.dim_input(); }
  /// ||K - L L^T|| / ||K|| for the cached factorization.
  [[nodiscard]] double factorization_residual() const;

  /// Copy with a different beta (e.g. after calibration).
  [[nodiscard]] GpPhsModel with_beta(const Vec& beta) const;

 private:
  [[nodiscard]] double unpinned_hamiltonian(const Vec& x) const;
  [[nodiscard]] Vec closed_form_gradient(const Vec& x) const;
  [[nodiscard]] Mat cross_covariance(const Vec& x) const;  // n x nN

  GpHyperparams hyper_;
  FilteredDataset data_;
  PosteriorOptions options_;
  Vec y_;
  GramFactor factor_;
  Vec alpha_;
  Mat weights_;  // column j: J_R(x_j)^T alpha_j, so grad H_hat = sf^2 sum Pi(x, x_j) w_j
  Vec x_ref_;
  double h_ref_ = 0.0;
};

/// beta_i as the `quantile` of |mu_i - f_i| / scale_i over validation states,
/// with scale = var or sqrt(var) per `scale`.
Vec calibrate_beta(const GpPhsModel& model, const Mat& states, const Mat& true_drift,
                   double quantile = 0.99, BoundScale scale = BoundScale::variance);

}  // namespace phslab::gp
