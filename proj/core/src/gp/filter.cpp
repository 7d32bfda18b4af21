#include "phslab/gp/filter.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace phslab::gp {

void FilteredDataset::validate() const {
  const auto N = states.cols();
  if (N < 1 || derivatives.cols() != N || inputs.cols() != N ||
      static_cast<Eigen::Index>(times.size()) != N || derivatives.rows() != states.rows()) {
    throw InvalidArgument("FilteredDataset: misaligned columns");
  }
}

SavitzkyGolay::SavitzkyGolay(int window, int order) : window_(window), order_(order) {
  if (order < 1) throw InvalidArgument("SavitzkyGolay: order must be >= 1");
  if (window % 2 == 0) throw InvalidArgument("SavitzkyGolay: window must be odd");
  if (window < order + 2) throw InvalidArgument("SavitzkyGolay: window must be >= order + 2");

  Mat vander(window, order + 1);
  coefficients_.reserve(window);
  for (int s = 0; s < window; ++s) {
    // Local polynomial in the offset from the evaluation sample s.
    for (int j = 0; j < window; ++j) {
      double p = 1.0;
      for (int c = 0; c <= order; ++c) {
        vander(j, c) = p;
        p *= static_cast<double>(j - s);
      }
    }
    // Rows of the pseudo-inverse: value and first derivative at offset 0.
    const Mat pinv = vander.colPivHouseholderQr().solve(Mat::Identity(window, window));
    coefficients_.push_back(pinv.topRows(2));
  }
}

Mat SavitzkyGolay::apply(const Mat& values, double dt, int deriv) const {
  if (deriv < 0 || deriv > 1) throw InvalidArgument("SavitzkyGolay: deriv must be 0 or 1");
  const auto K = values.cols();
  if (K < window_) {
    throw InvalidArgument(
        fmt::format("SavitzkyGolay: {} samples is shorter than the window {}", K, window_));
  }
  const int half = window_ / 2;
  const double scale = deriv == 0 ? 1.0 : 1.0 / dt;
  Mat out(values.rows(), K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const Eigen::Index start = std::clamp<Eigen::Index>(k - half, 0, K - window_);
    const int s = static_cast<int>(k - start);
    const auto weights = coefficients_[s].row(deriv);
    out.col(k) = scale * (values.middleCols(start, window_) * weights.transpose());
  }
  return out;
}

FilteredDataset filter_derivatives(const phs::Trajectory& traj, int window, int order) {
  traj.validate();
  const int K = traj.size();
  if (K < 2) throw InvalidArgument("filter_derivatives: need at least two samples");
  const SavitzkyGolay sg(window, order);
  if (K < window) {
    throw InvalidArgument(
        fmt::format("filter_derivatives: trajectory has {} samples, window is {}", K, window));
  }
  const double dt = (traj.times.back() - traj.times.front()) / (K - 1);
  for (int k = 1; k < K; ++k) {
    const double step = traj.times[k] - traj.times[k - 1];
    if (std::abs(step - dt) > 1e-6 * dt) {
      throw InvalidArgument(fmt::format("filter_derivatives: non-uniform sampling at index {}", k));
    }
  }
  FilteredDataset out;
  out.times = traj.times;
  out.states = sg.apply(traj.states, dt, 0);
  out.derivatives = sg.apply(traj.states, dt, 1);
  out.inputs = traj.inputs;
  return out;
}

}  // namespace phslab::gp
