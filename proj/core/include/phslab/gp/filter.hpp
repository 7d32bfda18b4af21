#pragma once

#include <vector>

#include "phslab/phs/trajectory.hpp"

namespace phslab::gp {

/// Paired states and derivative estimates used for training.
struct FilteredDataset {
  std::vector<double> times;
  Mat states;       // n x N
  Mat derivatives;  // n x N
  Mat inputs;       // m x N

  [[nodiscard]] int size() const { return static_cast<int>(states.cols()); }
  [[nodiscard]] int dim_state() const { return static_cast<int>(states.rows()); }
  void validate() const;
};

/// Savitzky-Golay smoother / differentiator on a uniform grid. Interior
/// points use the centred window; the first and last window/2 points use
/// one-sided fits over the first/last `window` samples.
class SavitzkyGolay {
 public:
  SavitzkyGolay(int window, int order);

  /// Smoothed values (deriv = 0) or derivatives (deriv = 1) of the rows of
  /// `values` (d x K) sampled with spacing `dt`.
  [[nodiscard]] Mat apply(const Mat& values, double dt, int deriv) const;

  [[nodiscard]] int window() const { return window_; }
  [[nodiscard]] int order() const { return order_; }

 private:
  int window_;
  int order_;
  // coefficients_[s] holds the weights (rows: derivative order 0..1) for an
  // evaluation point at offset s within the window.
  std::vector<Mat> coefficients_;
};

/// Smooths the states of `traj` and estimates their time derivatives.
/// Throws InvalidArgument for non-uniform sampling, window < order + 2, an
/// even window, or a trajectory shorter than the window.
FilteredDataset filter_derivatives(const phs::Trajectory& traj, int window = 9, int order = 3);

}  // namespace phslab::gp
