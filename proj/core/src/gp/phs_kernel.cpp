#include "phslab/gp/phs_kernel.hpp"

#include <fmt/format.h>

#include "phslab/gp/se_kernel.hpp"

namespace phslab::gp {

Mat phs_kernel(const Vec& x, const Vec& xp, const GpHyperparams& hyper) {
  const double sf2 = hyper.signal_std * hyper.signal_std;
  return sf2 * hyper.structure.structure(x) * se_hessian(x, xp, hyper.lengthscales) *
         hyper.structure.structure(xp).transpose();
}

Mat gram_matrix(const Mat& X, const GpHyperparams& hyper, double jitter) {
  hyper.validate();
  const auto n = X.rows();
  const auto N = X.cols();
  if (n != hyper.dim_state()) throw InvalidArgument("gram_matrix: state dimension mismatch");
  const double sf2 = hyper.signal_std * hyper.signal_std;

  std::vector<Mat> jr(N);
  for (Eigen::Index i = 0; i < N; ++i) jr[i] = hyper.structure.structure(X.col(i));

  Mat K(n * N, n * N);
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index i = j; i < N; ++i) {
      const Mat block =
          sf2 * jr[i] * se_hessian(X.col(i), X.col(j), hyper.lengthscales) * jr[j].transpose();
      K.block(i * n, j * n, n, n) = block;
      if (i != j) K.block(j * n, i * n, n, n) = block.transpose();
    }
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index a = 0; a < n; ++a) K(i * n + a, i * n + a) += hyper.noise_variances(a) + jitter;
  }
  return K;
}

GramFactor factorize_gram(const Mat& K, double initial_jitter, double max_jitter) {
  GramFactor f;
  if (initial_jitter == 0.0) {
    f.llt.compute(K);
    if (f.llt.info() == Eigen::Success) return f;
  }
  double jitter = initial_jitter > 0.0 ? initial_jitter : 1e-12;
  while (jitter <= max_jitter * (1.0 + 1e-12)) {
    Mat Kj = K;
    Kj.diagonal().array() += jitter;
    f.llt.compute(Kj);
    if (f.llt.info() == Eigen::Success) {
      f.jitter = jitter;
      return f;
    }
    jitter *= 10.0;
  }
  throw ConditioningError(
      fmt::format("Gram matrix ({} x {}) is not positive definite even with jitter {:.1e}",
                  K.rows(), K.cols(), max_jitter));
}

}  // namespace phslab::gp
