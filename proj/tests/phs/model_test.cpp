#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "phslab/phs/microactuator.hpp"
#include "phslab/phs/model.hpp"

using namespace phslab;
using namespace phslab::phs;

namespace {

Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

Mat random_states(int n, int count, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Mat X(n, count);
  for (int j = 0; j < count; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = d(rng);
  return X;
}

}  // namespace

TEST(Microactuator, EquilibriumHasZeroDrift) {
  const auto model = make_microactuator();
  const Vec xdot = model.eval_dynamics(v3(1, 0, 0), Vec::Zero(1));
  EXPECT_EQ(xdot.norm(), 0.0);
}

TEST(Microactuator, MomentumDrivesGap) {
  const auto model = make_microactuator();
  const Vec xdot = model.eval_dynamics(v3(1, 1, 0), Vec::Zero(1));
  EXPECT_DOUBLE_EQ(xdot(0), 1.0);
}

TEST(Microactuator, InputEntersThroughResistance) {
  const auto model = make_microactuator();
  const Vec xdot = model.eval_dynamics(v3(1, 0, 0), Vec::Constant(1, 2.0));
  EXPECT_DOUBLE_EQ(xdot(2), 2.0);
}

TEST(Microactuator, StructureMatchesDefaults) {
  const auto model = make_microactuator();
  const Vec x = v3(0.7, -0.3, 0.4);
  Mat expected(3, 3);
  expected << 0, 1, 0, -1, -0.5, 0, 0, 0, -1;
  EXPECT_TRUE((model.interconnection(x) - model.dissipation(x)).isApprox(expected, 0.0));
  EXPECT_EQ(model.io_matrix(x), (Mat(3, 1) << 0, 0, 1).finished());
}

TEST(Microactuator, GapGradientCancelsAtHandPoint) {
  // k (x1 - 1) + d(x1/c0)/dx1 x3^2 = -1 + 1 at (0.9, 0, 1).
  const auto model = make_microactuator();
  const Vec g = model.hamiltonian_gradient(v3(0.9, 0, 1));
  EXPECT_NEAR(g(0), 0.0, 1e-14);

  const double h = 1e-6;
  const double fd = (model.hamiltonian(v3(0.9 + h, 0, 1)) - model.hamiltonian(v3(0.9 - h, 0, 1))) /
                    (2 * h);
  EXPECT_NEAR(fd, 0.0, 1e-8);
}

TEST(Microactuator, ElectricalEnergyIsLiteralByDefault) {
  const auto full = make_microactuator();
  MicroactuatorParams p;
  p.half_electrical_energy = true;
  const auto half = make_microactuator(p);
  const Vec x = v3(1.0, 0.0, 2.0);  // only the electrical term is nonzero
  EXPECT_DOUBLE_EQ(full.hamiltonian(x), 4.0);
  EXPECT_DOUBLE_EQ(half.hamiltonian(x), 2.0);
}

TEST(Microactuator, RejectsInvalidParameters) {
  MicroactuatorParams p;
  p.mass = 0.0;
  EXPECT_THROW(make_microactuator(p), InvalidArgument);
  p = {};
  p.damping = -0.1;
  EXPECT_THROW(make_microactuator(p), InvalidArgument);
  p = {};
  p.capacitance = {"negative", [](double x) { return x - 1.0; }, [](double) { return 1.0; }};
  EXPECT_THROW(make_microactuator(p), InvalidArgument);
}

TEST(Microactuator, StructuralInvariantsOnRandomStates) {
  const auto model = make_microactuator();
  const StructureCheck check = check_structure(model, random_states(3, 1000, 0.05, 2.0, 11));
  EXPECT_TRUE(check.ok()) << check.max_skew_error << " " << check.min_dissipation_eig << " "
                          << check.max_gradient_error;
}

TEST(PhsModel, NonFiniteDynamicsAreReported) {
  MicroactuatorParams p;
  p.capacitance = {"singular", [](double x) { return 1.0 / x; },
                   [](double x) { return -1.0 / (x * x); }};
  p.gap_min = 0.5;
  const auto model = make_microactuator(p);
  EXPECT_THROW(model.eval_dynamics(v3(0.0, 0.0, 1.0), Vec::Zero(1)), ModelEvaluationError);
}

TEST(LinearPhs, StructuralInvariants) {
  Mat J(2, 2), R(2, 2), G(2, 1), Q(2, 2);
  J << 0, 1, -1, 0;
  R << 0, 0, 0, 0.5;
  G << 0, 1;
  Q << 1, 0, 0, 1;
  const auto model = make_linear(J, R, G, Q);
  const StructureCheck check = check_structure(model, random_states(2, 1000, -3, 3, 5));
  EXPECT_TRUE(check.ok());
  const Vec x = (Vec(2) << 0.3, -1.2).finished();
  EXPECT_TRUE(model.drift(x).isApprox((J - R) * Q * x));
  EXPECT_DOUBLE_EQ(model.output(x)(0), -1.2);
}

TEST(LinearPhs, CheckStructureFlagsBrokenModels) {
  Mat J(2, 2), R(2, 2), G(2, 1), Q = Mat::Identity(2, 2);
  J << 0, 1, 1, 0;  // not skew
  R << 0, 0, 0, -0.1;  // not PSD
  G << 0, 1;
  PhsModel model;
  model.dim_state = 2;
  model.dim_input = 1;
  model.interconnection = [J](const Vec&) { return J; };
  model.dissipation = [R](const Vec&) { return R; };
  model.io_matrix = [G](const Vec&) { return G; };
  model.hamiltonian = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  model.hamiltonian_gradient = [](const Vec& x) { return Vec(2.0 * x); };  // wrong by 2x
  const StructureCheck check = check_structure(model, random_states(2, 20, -1, 1, 3));
  EXPECT_GT(check.max_skew_error, 1e-12);
  EXPECT_LT(check.min_dissipation_eig, -1e-10);
  EXPECT_GT(check.max_gradient_error, 1e-6);
  EXPECT_FALSE(check.ok());
}
