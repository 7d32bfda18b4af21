#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "phslab/control/conditions.hpp"
#include "phslab/gp/gp_phs_model.hpp"
#include "phslab/phs/simulate.hpp"

using namespace phslab;
using namespace phslab::control;
using fixtures::v3;

namespace {

// Quadratic test problem: Hd = |xbar|^2 / 2, Rd = rho I, constant envelope.
struct Quadratic {
  NominalModel nominal;
  DesiredDynamics desired;
  std::shared_ptr<ReferencePlan> plan;

  Quadratic(int n, double eta0, double rho) {
    nominal.dim_state = n;
    nominal.dim_input = 1;
    nominal.drift = [n](const Vec&) { return Vec(Vec::Zero(n)); };
    nominal.io_matrix = [n](const Vec&) { return Mat(Mat::Identity(n, 1)); };
    nominal.envelope = [n, eta0](const Vec&) { return Vec(Vec::Constant(n, eta0)); };
    desired.interconnection = [n](const Vec&) { return Mat(Mat::Zero(n, n)); };
    desired.damping = [n, rho](const Vec&) { return Mat(rho * Mat::Identity(n, n)); };
    desired.energy = [](const Vec& x, const Vec& xd) { return 0.5 * (x - xd).squaredNorm(); };
    desired.energy_gradient = [](const Vec& x, const Vec& xd) { return Vec(x - xd); };
    std::vector<double> times = phs::uniform_grid(0.0, 1.0, 11);
    plan = std::make_shared<ReferencePlan>(times, Mat::Zero(n, 11), Mat::Zero(n, 11));
  }
};

}  // namespace

TEST(WorstCaseMargin, SignMatchedCorner) {
  const Vec grad = v3(1.0, -2.0, 0.5);
  const Mat Rd = Vec(v3(1.0, 2.0, 4.0)).asDiagonal();
  const Vec env = v3(0.1, 0.2, 0.3);
  // 1 + 8 + 1 - (0.1 + 0.4 + 0.15)
  EXPECT_NEAR(worst_case_margin(grad, Rd, env), 10.0 - 0.65, 1e-14);
  // Exhaustive check over the eight corners of the eta box.
  double worst = 1e300;
  for (int mask = 0; mask < 8; ++mask) {
    Vec eta(3);
    for (int i = 0; i < 3; ++i) eta(i) = (mask >> i & 1) ? env(i) : -env(i);
    worst = std::min(worst, grad.dot(Rd * grad) - grad.dot(eta));
  }
  EXPECT_NEAR(worst_case_margin(grad, Rd, env), worst, 1e-14);
}

TEST(DissipationCondition, PerfectModelIsCertified) {
  const fixtures::PerfectMicroactuator setup(10.0, 1.0);
  const ReferencePlan plan = setup.plan();
  ConditionSampling s;
  s.samples_per_radius = 500;
  const ConditionReport r = verify_dissipation_condition(setup.nominal, setup.desired, plan, s);
  EXPECT_TRUE(r.satisfied);
  EXPECT_EQ(r.epsilon, 0.0);
  EXPECT_GE(r.min_margin, 0.0);
  EXPECT_EQ(r.max_worst_perturbation, 0.0);
}

TEST(DissipationCondition, QuadraticClosedFormEpsilon) {
  for (int n : {2, 3}) {
    const double eta0 = 0.3, rho = 0.5;
    const Quadratic q(n, eta0, rho);
    ConditionSampling s;
    s.samples_per_radius = 10000;
    s.max_radius = 4.0;
    s.radial_levels = 40;
    s.seed = 3;
    const ConditionReport r = verify_dissipation_condition(q.nominal, q.desired, *q.plan, s);
    const double exact = eta0 * std::sqrt(static_cast<double>(n)) / rho;
    EXPECT_NEAR(r.epsilon, exact, s.max_radius / s.radial_levels) << "n = " << n;
    EXPECT_FALSE(r.satisfied);
    EXPECT_LT(r.min_margin, 0.0);
  }
}

TEST(DissipationCondition, FailsEverywhereGivesInfinity) {
  const Quadratic q(3, 10.0, 0.1);  // exact epsilon = 173 > max radius
  ConditionSampling s;
  s.samples_per_radius = 200;
  const ConditionReport r = verify_dissipation_condition(q.nominal, q.desired, *q.plan, s);
  EXPECT_TRUE(std::isinf(r.epsilon));
  EXPECT_FALSE(r.satisfied);
}

TEST(DissipationCondition, EpsilonGrowsWithBeta) {
  // GP nominal with a PD target damping so a finite epsilon exists.
  const fixtures::PerfectMicroactuator setup(10.0, 1.0);
  const ReferencePlan plan = setup.plan();
  const auto traj = phs::simulate(setup.plant, v3(0, 0, 1),
                                  [](double t) { return Vec::Constant(1, std::sin(t)); }, 0.0,
                                  20.0, 60);
  gp::FilteredDataset d;
  d.times = traj.times;
  d.states = traj.states;
  d.inputs = traj.inputs;
  d.derivatives.resize(3, traj.size());
  for (int k = 0; k < traj.size(); ++k) {
    d.derivatives.col(k) = setup.plant.eval_dynamics(traj.states.col(k), traj.inputs.col(k));
  }
  auto h = gp::GpHyperparams::defaults(gp::microactuator_structure(0.5, 1.0), 1e-3);
  ConditionSampling s;
  s.samples_per_radius = 500;
  s.radial_levels = 20;
  s.radius_tolerance = 1e-3;
  double previous_eps = 0.0, previous_worst = 0.0;
  for (double beta : {1.0, 2.0, 4.0}) {
    gp::PosteriorOptions opts;
    opts.beta = Vec::Constant(3, beta);
    auto model = std::make_shared<const gp::GpPhsModel>(h, d, opts);
    const auto [Jd, Rd0] = microactuator_target_structure(0.5, 10.0);
    Mat Rd = Rd0;
    Rd(0, 0) = 1.0;
    const DesiredDynamics desired = shifted_energy_target(Jd, Rd, energy_of(model), v3(1, 0, 0));
    const ConditionReport r = verify_dissipation_condition(nominal_from_gp(model), desired, plan, s);
    EXPECT_GE(r.epsilon, previous_eps) << "beta = " << beta;
    EXPECT_GE(r.max_worst_perturbation, 2.0 * previous_worst * (1.0 - 1e-12)) << "beta = " << beta;
    previous_eps = r.epsilon;
    previous_worst = r.max_worst_perturbation;
  }
  EXPECT_GT(previous_eps, 0.0);
}

TEST(DissipationCondition, SummaryRoundTrip) {
  const Quadratic q(2, 0.3, 0.5);
  ConditionSampling s;
  s.samples_per_radius = 300;
  const ConditionReport r = verify_dissipation_condition(q.nominal, q.desired, *q.plan, s);
  const auto dir = std::filesystem::temp_directory_path() / "phslab_conditions_test";
  std::filesystem::create_directories(dir);
  write_summary(dir / "summary.txt", r);
  write_margins_csv(dir / "margins.csv", r);
  const ConditionReport back = read_summary(dir / "summary.txt");
  EXPECT_EQ(back.epsilon, r.epsilon);
  EXPECT_EQ(back.satisfied, r.satisfied);
  std::ifstream is(dir / "margins.csv");
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "t,radius,xbar1,xbar2,dissipation,worst_perturbation,margin,matching_residual");
  std::filesystem::remove_all(dir);
}
