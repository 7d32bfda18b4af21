#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "phslab/phs/energy.hpp"
#include "phslab/phs/microactuator.hpp"
#include "phslab/phs/simulate.hpp"

using namespace phslab;
using namespace phslab::phs;

namespace {

Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

PhsModel lossless_microactuator() {
  MicroactuatorParams p;
  p.damping = 0.0;
  auto model = make_microactuator(p);
  model.dissipation = [](const Vec&) { return Mat(Mat::Zero(3, 3)); };
  return model;
}

}  // namespace

TEST(EnergyBalance, LosslessConservation) {
  const auto model = lossless_microactuator();
  StepControl step;
  const double T = 20.0;
  const auto traj = simulate(model, v3(0.8, 0.3, 0.5), [](double) { return Vec::Zero(1); }, 0.0,
                             T, 2001, step);
  const auto balance = energy_balance_residual(model, traj);
  const double drift = std::abs(balance.hamiltonian.back() - balance.hamiltonian.front());
  EXPECT_LE(drift, 10.0 * step.abs_tol * T);
  EXPECT_LE(balance.max_residual, 1e-4);
}

TEST(EnergyBalance, MicroactuatorOpenLoopResidual) {
  const auto model = make_microactuator();
  const auto traj = simulate(model, v3(0, 0, 1), [](double t) { return Vec::Constant(1, std::sin(t)); },
                             0.0, 20.0, 20001);
  const auto balance = energy_balance_residual(model, traj);
  EXPECT_LE(balance.max_residual, 1e-4);
  EXPECT_EQ(balance.residuals.size(), 20000u);
}

TEST(EnergyBalance, UnforcedEnergyIsNonIncreasing) {
  const auto model = make_microactuator();
  const auto traj = simulate(model, v3(1.3, 0.5, 0.8), [](double) { return Vec::Zero(1); }, 0.0,
                             10.0, 2001);
  const auto balance = energy_balance_residual(model, traj);
  for (std::size_t k = 1; k < balance.hamiltonian.size(); ++k) {
    EXPECT_LE(balance.hamiltonian[k] - balance.hamiltonian[k - 1],
              balance.residuals[k - 1] * (traj.times[k] - traj.times[k - 1]) + 1e-12);
  }
  EXPECT_DOUBLE_EQ(balance.supplied_energy, 0.0);
}

TEST(EnergyBalance, PassivityOnRandomRuns) {
  const auto model = make_microactuator();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> gap(0.5, 1.5), mom(-0.5, 0.5), amp(-2.0, 2.0),
      freq(0.2, 3.0);
  for (int run = 0; run < 10; ++run) {
    const Vec x0 = v3(gap(rng), mom(rng), mom(rng));
    const double a = amp(rng), w = freq(rng);
    const auto traj = simulate(model, x0, [a, w](double t) { return Vec::Constant(1, a * std::sin(w * t)); },
                               0.0, 10.0, 2001);
    const auto balance = energy_balance_residual(model, traj);
    const double dH = balance.hamiltonian.back() - balance.hamiltonian.front();
    EXPECT_LE(dH, balance.supplied_energy + balance.accumulated_bound + 1e-9) << "run " << run;
  }
}
