#pragma once

// Independent, deliberately naive GP-PHS conditioning used as a test oracle:
// the kernel is assembled from its textbook definition and solved densely.

#include <cmath>

#include <Eigen/Dense>

#include "phslab/gp/hyperparams.hpp"

namespace oracle {

using phslab::Mat;
using phslab::Vec;

inline Mat se_mixed_hessian(const Vec& x, const Vec& xp, const Vec& l) {
  const auto n = x.size();
  double q = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) q += (x(i) - xp(i)) * (x(i) - xp(i)) / (2 * l(i) * l(i));
  const double k = std::exp(-q);
  Mat out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double di = (x(i) - xp(i)) / (l(i) * l(i));
      const double dj = (x(j) - xp(j)) / (l(j) * l(j));
      out(i, j) = k * ((i == j ? 1.0 / (l(i) * l(i)) : 0.0) - di * dj);
    }
  }
  return out;
}

inline Mat kernel(const Vec& x, const Vec& xp, const phslab::gp::GpHyperparams& h) {
  const double sf2 = h.signal_std * h.signal_std;
  return sf2 * h.structure.structure(x) * se_mixed_hessian(x, xp, h.lengthscales) *
         h.structure.structure(xp).transpose();
}

inline Mat gram(const Mat& X, const phslab::gp::GpHyperparams& h) {
  const auto n = X.rows(), N = X.cols();
  Mat K(n * N, n * N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) K.block(i * n, j * n, n, n) = kernel(X.col(i), X.col(j), h);
    K.block(i * n, i * n, n, n).diagonal() += h.noise_variances;
  }
  return K;
}

struct Posterior {
  Vec mean;
  Vec variance;
};

// mean = K_*^T K^{-1} y + G u, variance = diag(k(x, x) - K_*^T K^{-1} K_*).
inline Posterior condition(const Mat& X, const Mat& Xdot, const Mat& U,
                           const phslab::gp::GpHyperparams& h, const Vec& x, const Vec& u) {
  const auto n = X.rows(), N = X.cols();
  Vec y(n * N);
  for (Eigen::Index i = 0; i < N; ++i) {
    y.segment(i * n, n) = Xdot.col(i) - h.structure.io_matrix(X.col(i)) * U.col(i);
  }
  Mat Ks(n * N, n);
  for (Eigen::Index i = 0; i < N; ++i) Ks.block(i * n, 0, n, n) = kernel(X.col(i), x, h);
  const Eigen::FullPivLU<Mat> lu(gram(X, h));
  const Mat solved = lu.solve(Ks);
  return {Ks.transpose() * lu.solve(y) + h.structure.io_matrix(x) * u,
          (kernel(x, x, h) - Ks.transpose() * solved).diagonal()};
}

}  // namespace oracle
