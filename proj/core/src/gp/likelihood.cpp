#include "phslab/gp/likelihood.hpp"

#include <cmath>
#include <numbers>

#include "phslab/gp/se_kernel.hpp"

namespace phslab::gp {

Vec mean_adjust(const FilteredDataset& data, const StructureEstimate& structure) {
  data.validate();
  const auto n = data.states.rows();
  const auto N = data.states.cols();
  Vec y(n * N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Vec x = data.states.col(i);
    y.segment(i * n, n) = data.derivatives.col(i) - structure.io_matrix(x) * data.inputs.col(i);
  }
  return y;
}

NlmlValue negative_log_marginal_likelihood(const FilteredDataset& data, const GpHyperparams& hyper,
                                           const ParamMask& mask, bool with_gradient,
                                           double jitter) {
  hyper.validate();
  const Eigen::Index n = data.states.rows();
  const Eigen::Index N = data.states.cols();
  const Eigen::Index total = n * N;

  const Vec y = mean_adjust(data, hyper.structure);
  const Mat K = gram_matrix(data.states, hyper);
  const GramFactor factor = factorize_gram(K, jitter);
  const Vec alpha = factor.llt.solve(y);

  NlmlValue out;
  out.jitter = factor.jitter;
  const Mat L = factor.llt.matrixL();
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  out.value = 0.5 * y.dot(alpha) + 0.5 * log_det +
              0.5 * static_cast<double>(total) * std::log(2.0 * std::numbers::pi);
  if (!with_gradient) return out;

  // W = alpha alpha^T - K^{-1}; d NLML = alpha^T dy - 1/2 tr(W dK).
  Mat W = -factor.llt.solve(Mat::Identity(total, total));
  W.noalias() += alpha * alpha.transpose();

  const auto& family = *hyper.structure.family;
  const Vec& phi = hyper.structure.params;
  const int num_struct = mask.structure ? family.num_params() : 0;
  const double sf2 = hyper.signal_std * hyper.signal_std;

  std::vector<Mat> jr(N);
  std::vector<std::vector<Mat>> djr(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Vec x = data.states.col(i);
    jr[i] = hyper.structure.structure(x);
    for (int p = 0; p < num_struct; ++p) djr[i].push_back(family.structure_derivative(x, phi, p));
  }

  double g_signal = 0.0;
  Vec g_length = Vec::Zero(n);
  Vec g_struct = Vec::Zero(num_struct);
  for (Eigen::Index j = 0; j < N; ++j) {
    const Vec xj = data.states.col(j);
    for (Eigen::Index i = j; i < N; ++i) {
      const Vec xi = data.states.col(i);
      // Off-diagonal blocks appear twice in the trace (W and dK symmetric).
      const double weight = (i == j) ? 1.0 : 2.0;
      const auto Wb = W.block(i * n, j * n, n, n);
      const Mat pi = se_hessian(xi, xj, hyper.lengthscales);
      const Mat left = jr[i] * pi;
      const Mat signal_block = sf2 * left * jr[j].transpose();
      if (mask.signal) g_signal += weight * 2.0 * Wb.cwiseProduct(signal_block).sum();
      if (mask.lengthscales) {
        for (Eigen::Index k = 0; k < n; ++k) {
          const Mat dpi = se_hessian_dlog_lengthscale(xi, xj, hyper.lengthscales, static_cast<int>(k));
          g_length(k) += weight * sf2 * Wb.cwiseProduct(jr[i] * dpi * jr[j].transpose()).sum();
        }
      }
      for (int p = 0; p < num_struct; ++p) {
        const Mat d = sf2 * (djr[i][p] * pi * jr[j].transpose() + left * djr[j][p].transpose());
        g_struct(p) += weight * Wb.cwiseProduct(d).sum();
      }
    }
  }

  out.gradient.resize(packed_size(hyper, mask));
  int idx = 0;
  if (mask.signal) out.gradient(idx++) = -0.5 * g_signal;
  if (mask.lengthscales) {
    for (Eigen::Index k = 0; k < n; ++k) out.gradient(idx++) = -0.5 * g_length(k);
  }
  if (mask.noise) {
    for (Eigen::Index a = 0; a < n; ++a) {
      double tr = 0.0;
      for (Eigen::Index i = 0; i < N; ++i) tr += W(i * n + a, i * n + a);
      out.gradient(idx++) = -0.5 * tr * hyper.noise_variances(a);
    }
  }
  for (int p = 0; p < num_struct; ++p) {
    // y_i = xdot_i - G(x_i) u_i  =>  dy_i = -dG_i u_i
    double dy_term = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      const Vec x = data.states.col(i);
      const Vec dy = -family.io_derivative(x, phi, p) * data.inputs.col(i);
      dy_term += alpha.segment(i * n, n).dot(dy);
    }
    out.gradient(idx++) = dy_term - 0.5 * g_struct(p);
  }
  return out;
}

}  // namespace phslab::gp
