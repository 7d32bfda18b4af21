#pragma once

#include <Eigen/Cholesky>

#include "phslab/gp/hyperparams.hpp"

namespace phslab::gp {

/// Gram matrix could not be factorized even after jitter escalation.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// k_phs(x, x') = sigma_f^2 J_R(x) Pi(x, x') J_R(x')^T with J_R = J_hat - R_hat.
Mat phs_kernel(const Vec& x, const Vec& xp, const GpHyperparams& hyper);

/// Block Gram matrix over the columns of X (n x N): block (i, j) is
/// k_phs(x_i, x_j) + delta_ij (diag(noise) + jitter I).
Mat gram_matrix(const Mat& X, const GpHyperparams& hyper, double jitter = 0.0);

struct GramFactor {
  Eigen::LLT<Mat> llt;
  double jitter = 0.0;  // jitter that was actually added
};

/// Cholesky of K + jitter I, escalating the jitter by factors of 10 from
/// `initial_jitter` (or 1e-12 when zero) up to `max_jitter`.
/// `K` must not already contain jitter.
GramFactor factorize_gram(const Mat& K, double initial_jitter = 0.0, double max_jitter = 1e-6);

}  // namespace phslab::gp
