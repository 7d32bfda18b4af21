#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace phslab;
using namespace phslab::control;
using fixtures::v3;

namespace {

DesiredDynamics quadratic(const Vec& minimum) {
  DesiredDynamics d;
  d.interconnection = [](const Vec& e) { return Mat(Mat::Zero(e.size(), e.size())); };
  d.damping = [](const Vec& e) { return Mat(Mat::Identity(e.size(), e.size())); };
  d.energy = [minimum](const Vec& x, const Vec& xd) {
    return 0.5 * (x - xd - minimum).squaredNorm();
  };
  d.energy_gradient = [minimum](const Vec& x, const Vec& xd) { return Vec(x - xd - minimum); };
  return d;
}

}  // namespace

TEST(ValidateHdMinimum, QuadraticOnUnitGrid) {
  const HdValidation v = validate_hd_minimum(quadratic(Vec::Zero(3)), v3(1, 0, 0.1),
                                             Vec::Constant(3, -2), Vec::Constant(3, 2), 21);
  EXPECT_TRUE(v.passed);
  EXPECT_LE(v.argmin.norm(), 1e-12);
  EXPECT_NEAR(v.gap, 0.5 * 0.2 * 0.2, 1e-12);
}

TEST(ValidateHdMinimum, ShiftedMinimumIsRejected) {
  const HdValidation v = validate_hd_minimum(quadratic(v3(0.5, 0, 0)), v3(1, 0, 0.1),
                                             Vec::Constant(3, -2), Vec::Constant(3, 2), 41);
  EXPECT_FALSE(v.passed);
  EXPECT_LE((v.argmin - v3(0.5, 0, 0)).norm(), 1e-12);
}

TEST(ValidateHdMinimum, LiteralCandidateFailsShiftedPasses) {
  const auto plant = phs::make_microactuator();
  const auto [Jd, Rd] = microactuator_target_structure(0.5, 10.0);
  const Vec xd = v3(1.0, -0.018, 0.1);
  const auto literal = shifted_energy_target(Jd, Rd, energy_of(plant), Vec::Zero(3));
  const auto shifted = shifted_energy_target(Jd, Rd, energy_of(plant), v3(1, 0, 0));
  const Vec lo = Vec::Constant(3, -2), hi = Vec::Constant(3, 2);
  const HdValidation bad = validate_hd_minimum(literal, xd, lo, hi, 21);
  EXPECT_FALSE(bad.passed);
  EXPECT_NEAR(bad.argmin(0), 1.0, 1e-12);  // the open-loop rest gap
  EXPECT_TRUE(validate_hd_minimum(shifted, xd, lo, hi, 21).passed);
}

TEST(ShiftedTarget, VanishesWithZeroGradientAtReference) {
  const auto plant = phs::make_microactuator();
  const auto [Jd, Rd] = microactuator_target_structure(0.5, 10.0);
  const auto d = shifted_energy_target(Jd, Rd, energy_of(plant), v3(1, 0, 0));
  const Vec xd = v3(0.9, 0.2, 0.3);
  EXPECT_EQ(d.energy(xd, xd), 0.0);
  EXPECT_LE(d.energy_gradient(xd, xd).norm(), 1e-15);
  const Vec x = xd + v3(0.1, -0.2, 0.05);
  // Hd(x, xd) = H(x - xd + x*) - H(x*).
  EXPECT_NEAR(d.energy(x, xd), plant.hamiltonian(x - xd + v3(1, 0, 0)), 1e-15);
}

TEST(TargetStructure, MicroactuatorEntries) {
  const auto [Jd, Rd] = microactuator_target_structure(0.7, 10.0);
  Mat J(3, 3), R = Mat::Zero(3, 3);
  J << 0, 1, 0, -1, 0, 0, 0, 0, 0;
  R(1, 1) = 0.7;
  R(2, 2) = 10.0;  // the argument is 1 / r_d
  EXPECT_EQ(Jd, J);
  EXPECT_TRUE(Rd.isApprox(R, 1e-15));
}

TEST(DesiredDynamics, StructureCheck) {
  DesiredDynamics d = quadratic(Vec::Zero(3));
  EXPECT_NO_THROW(d.check_structure(Vec::Zero(3)));
  d.damping = [](const Vec&) { return Mat(-Mat::Identity(3, 3)); };
  EXPECT_THROW(d.check_structure(Vec::Zero(3)), InvalidArgument);
  d = quadratic(Vec::Zero(3));
  d.damping = [](const Vec&) { return Mat(Mat::Ones(3, 3)); };  // not diagonal
  EXPECT_THROW(d.check_structure(Vec::Zero(3)), InvalidArgument);
  d = quadratic(Vec::Zero(3));
  d.interconnection = [](const Vec&) { return Mat(Mat::Ones(3, 3)); };
  EXPECT_THROW(d.check_structure(Vec::Zero(3)), InvalidArgument);
}

TEST(MinimizeEnergy, FindsMinimizers) {
  const auto plant = phs::make_microactuator();
  const Vec xs = minimize_energy(energy_of(plant), v3(0.7, 0.3, 0.2));
  EXPECT_LE((xs - v3(1, 0, 0)).norm(), 1e-8);
  EnergyFunction bowl{[](const Vec& x) { return (x.array() - 2.0).square().sum() + std::pow(x(0) - 2.0, 4); },
                      [](const Vec& x) {
                        Vec g = 2.0 * (x.array() - 2.0).matrix();
                        g(0) += 4.0 * std::pow(x(0) - 2.0, 3);
                        return g;
                      }};
  EXPECT_LE((minimize_energy(bowl, Vec::Zero(2)) - Vec::Constant(2, 2.0)).norm(), 1e-8);
}
