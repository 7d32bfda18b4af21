#include <cmath>

#include <gtest/gtest.h>

#include "phslab/phs/microactuator.hpp"
#include "phslab/phs/simulate.hpp"

using namespace phslab;
using namespace phslab::phs;

namespace {

PhsModel mass_spring_damper(double m, double k, double b) {
  Mat J(2, 2), R(2, 2), G(2, 1), Q(2, 2);
  J << 0, 1, -1, 0;
  R << 0, 0, 0, b;
  G << 0, 1;
  Q << k, 0, 0, 1.0 / m;
  return make_linear(J, R, G, Q);
}

// q'' + b q' + q = 0 with q(0) = 1, q'(0) = 0 (m = k = 1, underdamped).
Vec damped_oscillator(double b, double t) {
  const double zeta = b / 2.0;
  const double w = std::sqrt(1.0 - zeta * zeta);
  const double e = std::exp(-zeta * t);
  const double q = e * (std::cos(w * t) + zeta / w * std::sin(w * t));
  const double p = -e * (1.0 / w) * std::sin(w * t);
  return (Vec(2) << q, p).finished();
}

}  // namespace

TEST(Simulate, DatasetProtocolGrid) {
  const auto model = make_microactuator();
  const Vec x0 = (Vec(3) << 0, 0, 1).finished();
  const auto traj = simulate(model, x0, [](double t) { return Vec::Constant(1, std::sin(t)); },
                             0.0, 20.0, 300);
  ASSERT_EQ(traj.size(), 300);
  EXPECT_EQ(traj.times.front(), 0.0);
  EXPECT_DOUBLE_EQ(traj.times.back(), 20.0);
  EXPECT_EQ(traj.states.col(0), x0);
  ASSERT_TRUE(traj.outputs.has_value());
  EXPECT_NO_THROW(traj.validate());
  for (int k = 0; k < traj.size(); ++k) {
    EXPECT_DOUBLE_EQ((*traj.outputs)(0, k), model.output(traj.states.col(k))(0));
  }
}

TEST(Simulate, MatchesClosedFormDampedOscillator) {
  const double b = 0.5;
  const auto model = mass_spring_damper(1.0, 1.0, b);
  const auto traj = simulate(model, (Vec(2) << 1, 0).finished(),
                             [](double) { return Vec::Zero(1); }, 0.0, 20.0, 401);
  double worst = 0.0;
  for (int k = 0; k < traj.size(); ++k) {
    worst = std::max(worst, (traj.states.col(k) - damped_oscillator(b, traj.times[k])).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Simulate, LinearOracleForRandomTwoStateSystems) {
  // x' = A x with A = (J - R) Q; oracle is the matrix exponential, computed
  // here by a long Taylor series with scaling and squaring.
  auto expm = [](const Mat& A) {
    int s = 0;
    double nrm = A.cwiseAbs().rowwise().sum().maxCoeff();
    while (nrm > 0.5) {
      nrm /= 2;
      ++s;
    }
    const Mat B = A / std::pow(2.0, s);
    Mat E = Mat::Identity(2, 2), term = Mat::Identity(2, 2);
    for (int k = 1; k < 30; ++k) {
      term = term * B / k;
      E += term;
    }
    for (int i = 0; i < s; ++i) E = E * E;
    return E;
  };
  std::srand(7);
  for (int trial = 0; trial < 5; ++trial) {
    Mat J(2, 2), R(2, 2), G(2, 1), Q(2, 2);
    const double j = 0.5 + trial * 0.3;
    J << 0, j, -j, 0;
    Mat L = Mat::Random(2, 2) * 0.5;
    R = L * L.transpose();
    Mat P = Mat::Random(2, 2);
    Q = P * P.transpose() + Mat::Identity(2, 2);
    G << 1, 0;
    const auto model = make_linear(J, R, G, Q);
    const Vec x0 = Vec::Random(2);
    const auto traj = simulate(model, x0, [](double) { return Vec::Zero(1); }, 0.0, 5.0, 51);
    const Mat A = (J - R) * Q;
    double worst = 0.0;
    for (int k = 0; k < traj.size(); ++k) {
      const Vec exact = expm(A * traj.times[k]) * x0;
      worst = std::max(worst, (traj.states.col(k) - exact).cwiseAbs().maxCoeff());
    }
    EXPECT_LE(worst, 1e-6) << "trial " << trial;
  }
}

TEST(Simulate, DivergenceCarriesLastValidTime) {
  Mat J = Mat::Zero(1, 1), R = Mat::Zero(1, 1), G = Mat::Ones(1, 1), Q = Mat::Ones(1, 1);
  const auto model = make_linear(J, R, G, Q);
  // u = x^2 blows up at t = 1 from x(0) = 1.
  const std::vector<double> times = uniform_grid(0.0, 2.0, 201);
  try {
    simulate(model, Vec::Ones(1), [](double, const Vec& x) { return Vec(x.array().square()); },
             times);
    FAIL() << "expected divergence";
  } catch (const SimulationDiverged& e) {
    EXPECT_GT(e.last_time(), 0.9);
    EXPECT_LE(e.last_time(), 1.0);
  }
}

TEST(Simulate, UniformGrid) {
  const auto g = uniform_grid(0.0, 20.0, 300);
  ASSERT_EQ(g.size(), 300u);
  EXPECT_NEAR(g[1] - g[0], 20.0 / 299.0, 1e-15);
  EXPECT_EQ(g.back(), 20.0);
}
