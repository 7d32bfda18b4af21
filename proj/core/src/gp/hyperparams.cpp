#include "phslab/gp/hyperparams.hpp"

#include <cmath>

namespace phslab::gp {

void GpHyperparams::validate() const {
  if (!structure.family) throw InvalidArgument("GpHyperparams: missing structure family");
  const int n = structure.dim_state();
  if (lengthscales.size() != n || noise_variances.size() != n) {
    throw InvalidArgument("GpHyperparams: lengthscale/noise dimension does not match structure");
  }
  if (structure.params.size() != structure.family->num_params()) {
    throw InvalidArgument("GpHyperparams: wrong number of structure parameters");
  }
  if (!(signal_std > 0.0) || !std::isfinite(signal_std)) {
    throw InvalidArgument("GpHyperparams: signal_std must be positive");
  }
  if (!(lengthscales.array() > 0.0).all() || !lengthscales.allFinite()) {
    throw InvalidArgument("GpHyperparams: lengthscales must be positive");
  }
  if (!(noise_variances.array() >= 0.0).all() || !noise_variances.allFinite()) {
    throw InvalidArgument("GpHyperparams: noise variances must be nonnegative");
  }
}

GpHyperparams GpHyperparams::defaults(StructureEstimate structure, double noise_variance) {
  const int n = structure.dim_state();
  GpHyperparams h;
  h.signal_std = 1.0;
  h.lengthscales = Vec::Ones(n);
  h.noise_variances = Vec::Constant(n, noise_variance);
  h.structure = std::move(structure);
  return h;
}

int packed_size(const GpHyperparams& h, const ParamMask& mask) {
  const int n = h.dim_state();
  return (mask.signal ? 1 : 0) + (mask.lengthscales ? n : 0) + (mask.noise ? n : 0) +
         (mask.structure ? static_cast<int>(h.structure.params.size()) : 0);
}

Vec pack(const GpHyperparams& h, const ParamMask& mask) {
  Vec theta(packed_size(h, mask));
  int i = 0;
  if (mask.signal) theta(i++) = std::log(h.signal_std);
  if (mask.lengthscales) {
    for (Eigen::Index k = 0; k < h.lengthscales.size(); ++k) theta(i++) = std::log(h.lengthscales(k));
  }
  if (mask.noise) {
    for (Eigen::Index k = 0; k < h.noise_variances.size(); ++k) {
      if (!(h.noise_variances(k) > 0.0)) {
        throw InvalidArgument("pack: learned noise variances must be strictly positive");
      }
      theta(i++) = std::log(h.noise_variances(k));
    }
  }
  if (mask.structure) {
    for (Eigen::Index k = 0; k < h.structure.params.size(); ++k) theta(i++) = h.structure.params(k);
  }
  return theta;
}

GpHyperparams unpack(const Vec& theta, const GpHyperparams& base, const ParamMask& mask) {
  if (theta.size() != packed_size(base, mask)) throw InvalidArgument("unpack: size mismatch");
  GpHyperparams h = base;
  int i = 0;
  if (mask.signal) h.signal_std = std::exp(theta(i++));
  if (mask.lengthscales) {
    for (Eigen::Index k = 0; k < h.lengthscales.size(); ++k) h.lengthscales(k) = std::exp(theta(i++));
  }
  if (mask.noise) {
    for (Eigen::Index k = 0; k < h.noise_variances.size(); ++k) {
      h.noise_variances(k) = std::exp(theta(i++));
    }
  }
  if (mask.structure) {
    for (Eigen::Index k = 0; k < h.structure.params.size(); ++k) h.structure.params(k) = theta(i++);
  }
  return h;
}

}  // namespace phslab::gp
