#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "phslab/gp/likelihood.hpp"
#include "phslab/phs/microactuator.hpp"
#include "phslab/phs/simulate.hpp"

using namespace phslab;
using namespace phslab::gp;

namespace {

FilteredDataset microactuator_data(int count, double noise, unsigned seed) {
  const auto model = phs::make_microactuator();
  const auto traj = phs::simulate(model, (Vec(3) << 0, 0, 1).finished(),
                                  [](double t) { return Vec::Constant(1, std::sin(t)); }, 0.0,
                                  20.0, count);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, std::sqrt(noise));
  FilteredDataset d;
  d.times = traj.times;
  d.states = traj.states;
  d.inputs = traj.inputs;
  d.derivatives.resize(3, count);
  for (int k = 0; k < count; ++k) {
    d.derivatives.col(k) = model.eval_dynamics(traj.states.col(k), traj.inputs.col(k));
    for (int i = 0; i < 3; ++i) d.derivatives(i, k) += eps(rng);
  }
  return d;
}

GpHyperparams test_hyper() {
  GpHyperparams h = GpHyperparams::defaults(microactuator_structure(0.7, 1.3), 0.02);
  h.signal_std = 1.4;
  h.lengthscales = (Vec(3) << 0.8, 1.1, 1.6).finished();
  h.noise_variances = (Vec(3) << 0.02, 0.03, 0.015).finished();
  return h;
}

}  // namespace

TEST(MeanAdjust, ZeroInputKeepsDerivatives) {
  FilteredDataset d = microactuator_data(10, 0.0, 1);
  d.inputs.setZero();
  const Vec y = mean_adjust(d, microactuator_structure(0.5, 1.0));
  EXPECT_EQ(y, Eigen::Map<const Vec>(d.derivatives.data(), d.derivatives.size()));
}

TEST(MeanAdjust, UnitInputShiftsChargeDerivative) {
  FilteredDataset d = microactuator_data(4, 0.0, 1);
  d.inputs.setOnes();
  const Vec y = mean_adjust(d, microactuator_structure(0.5, 1.0));
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(y(3 * k), d.derivatives(0, k));
    EXPECT_EQ(y(3 * k + 1), d.derivatives(1, k));
    EXPECT_NEAR(y(3 * k + 2), d.derivatives(2, k) - 1.0, 1e-15);
  }
}

TEST(MeanAdjust, ExactPriorMeanGivesZero) {
  FilteredDataset d;
  d.times = {0.0};
  d.states = (Mat(3, 1) << 1, 0, 0).finished();
  d.inputs = Mat::Constant(1, 1, 2.0);
  d.derivatives = (Mat(3, 1) << 0, 0, 2.0).finished();
  EXPECT_EQ(mean_adjust(d, microactuator_structure(0.5, 1.0)).norm(), 0.0);
}

TEST(Nlml, ScalarGaussianClosedForm) {
  // n = N = 1 with J_R = -1: k_phs(x, x) = sf^2 / l^2.
  GpHyperparams h = GpHyperparams::defaults(
      constant_structure(Mat::Zero(1, 1), Mat::Ones(1, 1), Mat::Zero(1, 1)), 0.3);
  h.signal_std = 2.0;
  h.lengthscales = Vec::Constant(1, 0.5);
  FilteredDataset d;
  d.times = {0.0};
  d.states = Mat::Constant(1, 1, 0.4);
  d.derivatives = Mat::Constant(1, 1, 1.7);
  d.inputs = Mat::Zero(1, 1);
  const double v = 4.0 / 0.25 + 0.3;
  const double expected =
      1.7 * 1.7 / (2 * v) + 0.5 * std::log(v) + 0.5 * std::log(2 * std::numbers::pi);
  EXPECT_NEAR(negative_log_marginal_likelihood(d, h).value, expected, 1e-13);
}

TEST(Nlml, GradientMatchesFiniteDifferences) {
  const FilteredDataset d = microactuator_data(10, 0.01, 3);
  const GpHyperparams h = test_hyper();
  const ParamMask mask;
  const NlmlValue v = negative_log_marginal_likelihood(d, h, mask);
  const Vec theta = pack(h, mask);
  ASSERT_EQ(v.gradient.size(), theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double step = 1e-5;
    Vec tp = theta, tm = theta;
    tp(i) += step;
    tm(i) -= step;
    const double fd = (negative_log_marginal_likelihood(d, unpack(tp, h, mask), mask, false).value -
                       negative_log_marginal_likelihood(d, unpack(tm, h, mask), mask, false).value) /
                      (2 * step);
    const double rel = std::abs(v.gradient(i) - fd) / std::max(1e-3, std::abs(fd));
    EXPECT_LE(rel, 1e-5) << "parameter " << i << " analytic " << v.gradient(i) << " fd " << fd;
  }
}

TEST(Nlml, MaskedGradientIsTheMatchingSubvector) {
  const FilteredDataset d = microactuator_data(8, 0.01, 4);
  const GpHyperparams h = test_hyper();
  ParamMask only_structure;
  only_structure.signal = only_structure.lengthscales = only_structure.noise = false;
  const NlmlValue full = negative_log_marginal_likelihood(d, h);
  const NlmlValue part = negative_log_marginal_likelihood(d, h, only_structure);
  ASSERT_EQ(part.gradient.size(), 2);
  EXPECT_NEAR(part.value, full.value, 1e-12);
  EXPECT_LE((part.gradient - full.gradient.tail(2)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Nlml, DivergesWithSignalScale) {
  const FilteredDataset d = microactuator_data(10, 0.01, 5);
  GpHyperparams h = test_hyper();
  double previous = negative_log_marginal_likelihood(d, h, {}, false).value;
  for (double sf : {1e2, 1e4, 1e6}) {
    h.signal_std = sf;
    const double value = negative_log_marginal_likelihood(d, h, {}, false).value;
    EXPECT_GT(value, previous);
    previous = value;
  }
  EXPECT_GT(previous, 100.0);
}
