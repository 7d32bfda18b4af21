#pragma once

#include "phslab/common.hpp"

namespace phslab::gp {

// Squared exponential kernel k(z, z') = exp(-sum_i (z_i - z'_i)^2 / (2 l_i^2))
// and the derivatives the PHS kernel is built from. All functions take the
// lengthscales l_i (not their squares).

double se_kernel(const Vec& x, const Vec& xp, const Vec& lengthscales);

/// dk/dz' evaluated at (x, x'): k(x, x') * Lambda^{-1} (x - x').
Vec se_kernel_grad_second(const Vec& x, const Vec& xp, const Vec& lengthscales);

/// Mixed Hessian Pi_ij = d^2 k / dz_i dz'_j at (x, x'):
///   Pi = k (Lambda^{-1} - Lambda^{-1} d d^T Lambda^{-1}),  d = x - x'.
/// Pi(x, x') is the covariance of grad H(x) and grad H(x') under H ~ GP(0, k).
Mat se_hessian(const Vec& x, const Vec& xp, const Vec& lengthscales);

/// d Pi / d log l_k.
Mat se_hessian_dlog_lengthscale(const Vec& x, const Vec& xp, const Vec& lengthscales, int k);

}  // namespace phslab::gp
