#pragma once

#include "phslab/gp/structure.hpp"

namespace phslab::gp {

/// GP-PHS hyperparameters in natural units.
struct GpHyperparams {
  double signal_std = 1.0;  // sigma_f
  Vec lengthscales;         // l_1..l_n
  Vec noise_variances;      // sigma_1^2..sigma_n^2 on the derivative observations
  StructureEstimate structure;

  [[nodiscard]] int dim_state() const { return static_cast<int>(lengthscales.size()); }
  /// Throws InvalidArgument on dimension mismatch or violated positivity.
  void validate() const;

  /// Defaults: sigma_f = 1, unit lengthscales, the given noise variance.
  static GpHyperparams defaults(StructureEstimate structure, double noise_variance = 1e-2);
};

/// Selects which hyperparameters are optimized.
struct ParamMask {
  bool signal = true;
  bool lengthscales = true;
  bool noise = true;
  bool structure = true;
};

/// Log-space packing: [log sigma_f][log l][log sigma^2][raw structure params],
/// with masked-out groups omitted.
int packed_size(const GpHyperparams& h, const ParamMask& mask);
Vec pack(const GpHyperparams& h, const ParamMask& mask);
GpHyperparams unpack(const Vec& theta, const GpHyperparams& base, const ParamMask& mask);

}  // namespace phslab::gp
