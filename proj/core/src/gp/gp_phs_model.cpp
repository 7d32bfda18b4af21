#include "phslab/gp/gp_phs_model.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "phslab/gp/likelihood.hpp"
#include "phslab/gp/se_kernel.hpp"

namespace phslab::gp {

GpPhsModel::GpPhsModel(GpHyperparams hyper, FilteredDataset data, PosteriorOptions options)
    : hyper_(std::move(hyper)), data_(std::move(data)), options_(std::move(options)) {
  hyper_.validate();
  data_.validate();
  const int n = hyper_.dim_state();
  if (data_.dim_state() != n) throw InvalidArgument("GpPhsModel: data dimension mismatch");
  if (options_.beta.size() == 0) options_.beta = Vec::Ones(n);
  if (options_.beta.size() != n || (options_.beta.array() < 0.0).any()) {
    throw InvalidArgument("GpPhsModel: beta must have one nonnegative entry per state");
  }
  if (!(options_.risk > 0.0 && options_.risk < 1.0)) {
    throw InvalidArgument("GpPhsModel: risk must lie in (0, 1)");
  }

  y_ = mean_adjust(data_, hyper_.structure);
  factor_ = factorize_gram(gram_matrix(data_.states, hyper_), options_.jitter);
  alpha_ = factor_.llt.solve(y_);

  const auto N = data_.states.cols();
  weights_.resize(n, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    weights_.col(j) = hyper_.structure.structure(data_.states.col(j)).transpose() *
                      alpha_.segment(j * n, n);
  }

  x_ref_ = options_.reference_state ? *options_.reference_state
                                    : Vec(data_.states.rowwise().mean());
  if (x_ref_.size() != n) throw InvalidArgument("GpPhsModel: reference state dimension mismatch");
  options_.reference_state = x_ref_;
  h_ref_ = unpinned_hamiltonian(x_ref_);
}

Vec GpPhsModel::closed_form_gradient(const Vec& x) const {
  const double sf2 = hyper_.signal_std * hyper_.signal_std;
  const Vec inv_sq = hyper_.lengthscales.array().square().inverse();
  Vec g = Vec::Zero(x.size());
  for (Eigen::Index j = 0; j < data_.states.cols(); ++j) {
    const Vec scaled = (x - data_.states.col(j)).cwiseProduct(inv_sq);
    const double k = std::exp(-0.5 * (x - data_.states.col(j)).dot(scaled));
    // Pi w = k (S w - S d (S d)^T w)
    const auto w = weights_.col(j);
    g.noalias() += k * (inv_sq.cwiseProduct(w) - scaled * scaled.dot(w));
  }
  return sf2 * g;
}

double GpPhsModel::unpinned_hamiltonian(const Vec& x) const {
  const double sf2 = hyper_.signal_std * hyper_.signal_std;
  double h = 0.0;
  for (Eigen::Index j = 0; j < data_.states.cols(); ++j) {
    h += se_kernel_grad_second(x, data_.states.col(j), hyper_.lengthscales).dot(weights_.col(j));
  }
  return sf2 * h;
}

Mat GpPhsModel::cross_covariance(const Vec& x) const {
  const int n = dim_state();
  const auto N = data_.states.cols();
  const double sf2 = hyper_.signal_std * hyper_.signal_std;
  const Mat jr = hyper_.structure.structure(x);
  Mat kx(n, n * N);
  for (Eigen::Index j = 0; j < N; ++j) {
    const Vec xj = data_.states.col(j);
    kx.middleCols(j * n, n) = sf2 * jr * se_hessian(x, xj, hyper_.lengthscales) *
                              hyper_.structure.structure(xj).transpose();
  }
  return kx;
}

Vec GpPhsModel::drift_mean(const Vec& x) const {
  return hyper_.structure.structure(x) * closed_form_gradient(x);
}

Vec GpPhsModel::drift_mean_direct(const Vec& x) const { return cross_covariance(x) * alpha_; }

Vec GpPhsModel::drift_variance(const Vec& x) const {
  const Mat kx = cross_covariance(x);
  const Mat v = factor_.llt.matrixL().solve(kx.transpose());  // nN x n
  const Mat prior = phs_kernel(x, x, hyper_);
  Vec var = prior.diagonal() - v.colwise().squaredNorm().transpose();
  return var.cwiseMax(0.0);
}

Prediction GpPhsModel::predict(const Vec& x, const Vec& u) const {
  if (u.size() != dim_input()) throw InvalidArgument("predict: input dimension mismatch");
  return {drift_mean(x) + io_matrix(x) * u, drift_variance(x)};
}

Vec GpPhsModel::hamiltonian_gradient(const Vec& x) const {
  if (options_.hamiltonian_mode == HamiltonianMode::closed_form) return closed_form_gradient(x);
  const Mat jr = hyper_.structure.structure(x);
  Eigen::FullPivLU<Mat> lu(jr);
  if (!lu.isInvertible()) {
    throw ModelEvaluationError(fmt::format("J_R is singular at x = [{}]",
                                           fmt::join(x.data(), x.data() + x.size(), ", ")));
  }
  return lu.solve(drift_mean_direct(x));
}

double GpPhsModel::hamiltonian(const Vec& x) const {
  if (options_.hamiltonian_mode == HamiltonianMode::closed_form) {
    return unpinned_hamiltonian(x) - h_ref_;
  }
  const Vec dx = x - x_ref_;
  if (dx.norm() == 0.0) return 0.0;
  auto integrand = [&](double s) -> double {
    return hamiltonian_gradient(x_ref_ + s * dx).dot(dx);
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 15,
                                                                       1e-12);
}

Vec GpPhsModel::envelope_from_variance(const Vec& variance) const {
  if (options_.bound_scale == BoundScale::variance) return options_.beta.cwiseProduct(variance);
  return options_.beta.cwiseProduct(variance.cwiseMax(0.0).cwiseSqrt());
}

Vec GpPhsModel::error_envelope(const Vec& x) const {
  return envelope_from_variance(drift_variance(x));
}

double GpPhsModel::factorization_residual() const {
  Mat K = gram_matrix(data_.states, hyper_);
  K.diagonal().array() += factor_.jitter;
  const Mat L = factor_.llt.matrixL();
  return (K - L * L.transpose()).norm() / K.norm();
}

GpPhsModel GpPhsModel::with_beta(const Vec& beta) const {
  PosteriorOptions options = options_;
  options.beta = beta;
  return GpPhsModel(hyper_, data_, options);
}

Vec calibrate_beta(const GpPhsModel& model, const Mat& states, const Mat& true_drift,
                   double quantile, BoundScale scale) {
  if (states.cols() != true_drift.cols() || states.cols() == 0) {
    throw InvalidArgument("calibrate_beta: need matching, nonempty validation sets");
  }
  const int n = model.dim_state();
  std::vector<std::vector<double>> ratios(n);
  for (Eigen::Index k = 0; k < states.cols(); ++k) {
    const Vec x = states.col(k);
    const Vec err = (model.drift_mean(x) - true_drift.col(k)).cwiseAbs();
    const Vec var = model.drift_variance(x);
    for (int i = 0; i < n; ++i) {
      const double s = scale == BoundScale::variance ? var(i) : std::sqrt(var(i));
      ratios[i].push_back(s > 0.0 ? err(i) / s : (err(i) > 0.0 ? 1e300 : 0.0));
    }
  }
  Vec beta(n);
  for (int i = 0; i < n; ++i) {
    auto& r = ratios[i];
    std::sort(r.begin(), r.end());
    const auto idx = static_cast<std::size_t>(
        std::ceil(quantile * static_cast<double>(r.size())) - 1.0);
    beta(i) = r[std::min(idx, r.size() - 1)];
  }
  return beta;
}

}  // namespace phslab::gp
