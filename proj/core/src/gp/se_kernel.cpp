#include "phslab/gp/se_kernel.hpp"

#include <cmath>

namespace phslab::gp {

double se_kernel(const Vec& x, const Vec& xp, const Vec& lengthscales) {
  const Vec d = (x - xp).cwiseQuotient(lengthscales);
  return std::exp(-0.5 * d.squaredNorm());
}

Vec se_kernel_grad_second(const Vec& x, const Vec& xp, const Vec& lengthscales) {
  const Vec inv_sq = lengthscales.array().square().inverse();
  return se_kernel(x, xp, lengthscales) * (x - xp).cwiseProduct(inv_sq);
}

Mat se_hessian(const Vec& x, const Vec& xp, const Vec& lengthscales) {
  const Vec inv_sq = lengthscales.array().square().inverse();
  const Vec scaled = (x - xp).cwiseProduct(inv_sq);  // Lambda^{-1} d
  const double k = std::exp(-0.5 * (x - xp).dot(scaled));
  Mat pi = -k * scaled * scaled.transpose();
  pi.diagonal() += k * inv_sq;
  return pi;
}

Mat se_hessian_dlog_lengthscale(const Vec& x, const Vec& xp, const Vec& lengthscales, int k) {
  const Vec inv_sq = lengthscales.array().square().inverse();
  const Vec d = x - xp;
  const Vec scaled = d.cwiseProduct(inv_sq);
  const double kern = std::exp(-0.5 * d.dot(scaled));
  const double dk = kern * d(k) * d(k) * inv_sq(k);  // dk / dlog l_k

  // Pi = k (S - S d d^T S), S = diag(inv_sq); dS_kk / dlog l_k = -2 S_kk.
  Mat pi = -scaled * scaled.transpose();
  pi.diagonal() += inv_sq;
  Mat out = dk * pi;
  out(k, k) += kern * (-2.0 * inv_sq(k));
  // d(-s_i s_j d_i d_j) = 2 s_i s_j d_i d_j (delta_ik + delta_jk)
  for (Eigen::Index j = 0; j < d.size(); ++j) {
    out(k, j) += kern * 2.0 * scaled(k) * scaled(j);
    out(j, k) += kern * 2.0 * scaled(j) * scaled(k);
  }
  return out;
}

}  // namespace phslab::gp
