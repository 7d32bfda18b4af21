#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "phslab/control/lasalle.hpp"
#include "phslab/control/tracking.hpp"
#include "phslab/gp/gp_phs_model.hpp"
#include "phslab/linalg.hpp"
#include "phslab/phs/simulate.hpp"

using namespace phslab;
using namespace phslab::control;
using fixtures::v3;

namespace {

phs::StepControl tight() {
  phs::StepControl s;
  s.abs_tol = 1e-10;
  s.rel_tol = 1e-10;
  return s;
}

std::shared_ptr<const gp::GpPhsModel> small_gp(double resistance) {
  const auto plant = phs::make_microactuator();
  const auto traj = phs::simulate(plant, v3(0, 0, 1),
                                  [](double t) { return Vec::Constant(1, std::sin(t)); }, 0.0,
                                  20.0, 40);
  gp::FilteredDataset d;
  d.times = traj.times;
  d.states = traj.states;
  d.inputs = traj.inputs;
  d.derivatives.resize(3, traj.size());
  for (int k = 0; k < traj.size(); ++k) {
    d.derivatives.col(k) = plant.eval_dynamics(traj.states.col(k), traj.inputs.col(k));
  }
  auto h = gp::GpHyperparams::defaults(gp::microactuator_structure(0.5, resistance), 1e-4);
  h.lengthscales = v3(1.0, 1.5, 1.5);
  return std::make_shared<const gp::GpPhsModel>(h, d);
}

}  // namespace

TEST(TrackingControl, ReducesToMicroactuatorFormForExactModel) {
  const fixtures::PerfectMicroactuator setup;
  auto plan = std::make_shared<const ReferencePlan>(setup.plan());
  const TrackingController ctl(setup.nominal, setup.desired, plan);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t_of(0.0, 13.0), e(-0.5, 0.5);
  for (int q = 0; q < 100; ++q) {
    const double t = t_of(rng);
    const Vec x = plan->state(t) + v3(e(rng), e(rng), e(rng));
    const Vec grad_hd = setup.desired.energy_gradient(x, plan->state(t));
    const double reduced = microactuator_reduced_control(
        1.0, 10.0, grad_hd, plan->derivative(t)(2), setup.plant.hamiltonian_gradient(x));
    EXPECT_NEAR(ctl.control(t, x)(0), reduced, 1e-10);
  }
}

TEST(TrackingControl, ReducesToMicroactuatorFormForGpModel) {
  const fixtures::PerfectMicroactuator setup;
  auto plan = std::make_shared<const ReferencePlan>(setup.plan());
  for (double r_hat : {1.0, 1.7}) {
    const auto model = small_gp(r_hat);
    const NominalModel nominal = nominal_from_gp(model);
    const auto [Jd, Rd] = microactuator_target_structure(0.5, 10.0);
    const DesiredDynamics desired = shifted_energy_target(Jd, Rd, energy_of(model), v3(1, 0, 0));
    const TrackingController ctl(nominal, desired, plan);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> t_of(0.0, 13.0), e(-0.5, 0.5);
    for (int q = 0; q < 100; ++q) {
      const double t = t_of(rng);
      const Vec x = plan->state(t) + v3(e(rng), e(rng), e(rng));
      const double reduced = microactuator_reduced_control(
          r_hat, 10.0, desired.energy_gradient(x, plan->state(t)), plan->derivative(t)(2),
          model->hamiltonian_gradient(x));
      EXPECT_NEAR(ctl.control(t, x)(0), reduced, 1e-10) << "r_hat = " << r_hat;
    }
  }
}

TEST(TrackingControl, PerfectModelStaysOnReference) {
  const fixtures::PerfectMicroactuator setup;
  auto plan = std::make_shared<const ReferencePlan>(setup.plan());
  const TrackingController ctl(setup.nominal, setup.desired, plan);
  const auto times = phs::uniform_grid(0.0, 13.0, 1301);
  const ClosedLoopRun run = run_closed_loop(setup.plant, ctl, plan->state(0.0), times, nullptr, tight());
  EXPECT_LE(run.errors.cwiseAbs().maxCoeff(), 1e-4);

  // Error dynamics equal the target [Jd - Rd] grad Hd except in the
  // unactuated rows, where they carry the plan's own matching residual at x_d
  // (interpolation between nodes) plus the exact off-reference term
  // -2 x_d3 xbar_3 in the force row.
  double worst = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    const Vec x = run.trajectory.states.col(static_cast<Eigen::Index>(k));
    const Vec xd = plan->state(t);
    const Vec xbar_dot = setup.plant.eval_dynamics(x, ctl.control(t, x)) - plan->derivative(t);
    const Vec target = (setup.desired.interconnection(x - xd) - setup.desired.damping(x - xd)) *
                       setup.desired.energy_gradient(x, xd);
    const Mat Gp = left_annihilator(setup.nominal.io_matrix(x));
    const Vec on_reference = matching_residual(setup.nominal, setup.desired, *plan, xd, t);
    const Vec mismatch = v3(0.0, -2.0 * xd(2) * (x(2) - xd(2)), 0.0);
    const Vec rest = Gp * (xbar_dot - target) - on_reference - Gp * mismatch;
    worst = std::max({worst, rest.cwiseAbs().maxCoeff(), std::abs(xbar_dot(2) - target(2))});
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(TrackingControl, PortsAndRange) {
  const fixtures::PerfectMicroactuator setup;
  auto plan = std::make_shared<const ReferencePlan>(setup.plan());
  const TrackingController ctl(setup.nominal, setup.desired, plan);
  const Vec x = plan->state(2.0) + v3(0.1, 0.0, -0.05);
  const auto base = ctl.feedback();
  const auto zero_ex = ctl.semi_passive([](double) { return Vec::Zero(1); });
  EXPECT_EQ(base(2.0, x), zero_ex(2.0, x));
  const auto offset = ctl.semi_passive([](double) { return Vec::Constant(1, 0.3); });
  EXPECT_NEAR(offset(2.0, x)(0) - base(2.0, x)(0), 0.3, 1e-15);
  // y_ex = G^T grad Hd with G = e3.
  EXPECT_EQ(ctl.port_output(2.0, x)(0), setup.desired.energy_gradient(x, plan->state(2.0))(2));
  EXPECT_THROW(ctl.control(14.0, x), PlanRangeError);
}

TEST(SemiPassivity, StorageRateBoundedBySupply) {
  const fixtures::PerfectMicroactuator setup;
  auto plan = std::make_shared<const ReferencePlan>(setup.plan());
  const TrackingController ctl(setup.nominal, setup.desired, plan);
  const auto times = phs::uniform_grid(0.0, 13.0, 2601);
  const ClosedLoopRun run =
      run_closed_loop(setup.plant, ctl, plan->state(0.0) + v3(0.05, 0, 0), times,
                      [](double t) { return Vec::Constant(1, 0.2 * std::sin(2.0 * t)); }, tight());
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    const double dt = times[k + 1] - times[k];
    const double rate = (run.storage[k + 1] - run.storage[k]) / dt;
    const double supply = 0.5 * (run.port_outputs(0, c) * run.external_inputs(0, c) +
                                 run.port_outputs(0, c + 1) * run.external_inputs(0, c + 1));
    EXPECT_LE(rate - supply, 1e-4) << "t = " << times[k];
  }
}

TEST(SemiPassivity, ConstantInjectionStaysBounded) {
  const fixtures::PerfectMicroactuator setup;
  auto plan = std::make_shared<const ReferencePlan>(setup.plan());
  const TrackingController ctl(setup.nominal, setup.desired, plan);
  const ClosedLoopRun run =
      run_closed_loop(setup.plant, ctl, plan->state(0.0), phs::uniform_grid(0.0, 13.0, 1301),
                      [](double) { return Vec::Constant(1, 0.1); }, tight());
  double late_max = 0.0, late_min = 1e300;
  for (std::size_t k = 1000; k < run.storage.size(); ++k) {
    late_max = std::max(late_max, run.storage[k]);
    late_min = std::min(late_min, run.storage[k]);
  }
  // Injection through the charge port settles where 10 (dHd/dxbar3)^2 balances
  // 0.1 dHd/dxbar3, i.e. Hd stays of order (0.01)^2.
  EXPECT_LE(late_max, 1e-3);
  EXPECT_LE(late_max - late_min, 1e-3);
}

TEST(LaSalle, PerfectModelEnsembleConverges) {
  const fixtures::PerfectMicroactuator setup(10.0, 1.0);  // Rd = diag(1, 0.5, 0.1) is PD
  auto plan = std::make_shared<const ReferencePlan>(setup.plan(30.0));
  const TrackingController ctl(setup.nominal, setup.desired, plan);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<phs::Trajectory> runs;
  for (int i = 0; i < 20; ++i) {
    Vec d = v3(g(rng), g(rng), g(rng));
    d *= 0.5 * std::cbrt(u(rng)) / d.norm();
    runs.push_back(run_closed_loop(setup.plant, ctl, plan->state(0.0) + d,
                                   phs::uniform_grid(0.0, 30.0, 301), nullptr, tight())
                       .trajectory);
  }
  const LaSalleReport report =
      lasalle_probe(runs, [&](double t) { return plan->state(t); }, setup.desired, 1e-3);
  EXPECT_EQ(report.runs, 20);
  EXPECT_EQ(report.converged, 20);
  EXPECT_DOUBLE_EQ(report.fraction, 1.0);
}

TEST(LaSalle, LosslessTargetKeepsEnergy) {
  // Undamped plant: with Rd = 0 the unactuated rows match exactly.
  fixtures::PerfectMicroactuator setup;
  phs::MicroactuatorParams p;
  p.damping = 0.0;
  setup.plant = phs::make_microactuator(p);
  setup.nominal = nominal_from_plant(setup.plant);
  const auto [Jd, Rd] = microactuator_target_structure(0.0, 10.0);
  setup.desired = shifted_energy_target(Jd, Mat::Zero(3, 3), energy_of(setup.plant), v3(1, 0, 0));
  // Constant reference at the rest point so the matching equation holds
  // everywhere and the error dynamics are exactly the lossless target.
  std::vector<double> times = phs::uniform_grid(0.0, 10.0, 101);
  Mat xs = Mat::Zero(3, 101);
  xs.row(0).setOnes();
  auto plan = std::make_shared<const ReferencePlan>(times, xs, Mat::Zero(3, 101));
  const TrackingController ctl(setup.nominal, setup.desired, plan);
  const ClosedLoopRun run = run_closed_loop(setup.plant, ctl, v3(1.2, 0.1, 0.0), times, nullptr, tight());
  for (double h : run.storage) EXPECT_NEAR(h, run.storage.front(), 1e-7);
  const LaSalleReport report = lasalle_probe({run.trajectory}, [&](double t) { return plan->state(t); },
                                             setup.desired, 1e-3);
  EXPECT_EQ(report.converged, 0);
}

TEST(CountIncreases, Basics) {
  EXPECT_EQ(count_increases({3, 2, 2.5, 2.5 + 1e-7, 1}, 1e-6), 1);
  EXPECT_EQ(count_increases({}, 0.0), 0);
}
