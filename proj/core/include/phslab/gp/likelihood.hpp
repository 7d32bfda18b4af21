#pragma once

#include "phslab/gp/filter.hpp"
#include "phslab/gp/hyperparams.hpp"
#include "phslab/gp/phs_kernel.hpp"

namespace phslab::gp {

/// Stacked derivative observations minus the prior mean G_hat(x_i) u_i,
/// i.e. [xdot_1 - G u_1; ...; xdot_N - G u_N] (length nN).
Vec mean_adjust(const FilteredDataset& data, const StructureEstimate& structure);

struct NlmlValue {
  double value = 0.0;
  Vec gradient;  // w.r.t. pack(hyper, mask); empty when not requested
  double jitter = 0.0;
};

/// 1/2 y^T K^{-1} y + 1/2 log|K| + nN/2 log(2 pi) with y = mean_adjust(...).
/// The gradient uses d/dtheta = alpha^T dy/dtheta - 1/2 tr((alpha alpha^T - K^{-1}) dK/dtheta).
NlmlValue negative_log_marginal_likelihood(const FilteredDataset& data, const GpHyperparams& hyper,
                                           const ParamMask& mask = {}, bool with_gradient = true,
                                           double jitter = 0.0);

}  // namespace phslab::gp
