#include "phslab/harness/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "phslab/control/conditions.hpp"
#include "phslab/control/tracking.hpp"
#include "phslab/gp/model_io.hpp"
#include "phslab/gp/train.hpp"
#include "phslab/harness/figures.hpp"
#include "phslab/phs/microactuator.hpp"

namespace phslab::harness {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kExactFormat = "phslab.exact_plant";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
}

void require_artifact(const std::string& stage, const fs::path& path) {
  if (!fs::exists(path)) {
    throw StageError(stage, "missing artifact " + path.string());
  }
}

/// Runs `body`, converting any failure into a StageError for `stage`.
template <class Body>
void in_stage(const std::string& stage, Body&& body) {
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

phs::StepControl open_loop_steps() {
  phs::StepControl s;
  s.abs_tol = 1e-10;
  s.rel_tol = 1e-10;
  return s;
}

json plant_json(const PlantConfig& p) {
  return {{"model", p.model},         {"mass", p.mass},
          {"damping", p.damping},     {"stiffness", p.stiffness},
          {"resistance", p.resistance}, {"rest_gap", p.rest_gap},
          {"c0", p.c0},               {"half_electrical_energy", p.half_electrical_energy}};
}

phs::MicroactuatorParams plant_params(const PlantConfig& p) {
  phs::MicroactuatorParams mp;
  mp.mass = p.mass;
  mp.damping = p.damping;
  mp.stiffness = p.stiffness;
  mp.resistance = p.resistance;
  mp.rest_gap = p.rest_gap;
  mp.capacitance = phs::parallel_plate(p.c0);
  mp.half_electrical_energy = p.half_electrical_energy;
  return mp;
}

void write_filtered_csv(const fs::path& path, const gp::FilteredDataset& d) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const int n = d.dim_state();
  const auto m = d.inputs.rows();
  std::string header = "t";
  for (int i = 1; i <= n; ++i) header += fmt::format(",x{}", i);
  for (int i = 1; i <= n; ++i) header += fmt::format(",dx{}", i);
  for (Eigen::Index i = 1; i <= m; ++i) header += fmt::format(",u{}", i);
  os << header << '\n';
  for (int k = 0; k < d.size(); ++k) {
    std::string row = fmt::format("{:.17g}", d.times[static_cast<std::size_t>(k)]);
    for (int i = 0; i < n; ++i) row += fmt::format(",{:.17g}", d.states(i, k));
    for (int i = 0; i < n; ++i) row += fmt::format(",{:.17g}", d.derivatives(i, k));
    for (Eigen::Index i = 0; i < m; ++i) row += fmt::format(",{:.17g}", d.inputs(i, k));
    os << row << '\n';
  }
}

std::string vec_text(const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += fmt::format("{}{:.17g}", i ? " " : "", v(i));
  return out;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffU),
                    static_cast<std::uint32_t>(seed >> 32U), static_cast<std::uint32_t>(stream)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32U) | words[1];
}

phs::PhsModel build_plant(const ExperimentConfig& config) {
  return phs::make_microactuator(plant_params(config.plant));
}

phs::InputSignal excitation_signal(const ExperimentConfig& config) {
  const auto e = config.excitation;
  return [e](double t) {
    Vec u(1);
    u(0) = e.amplitude * std::sin(e.frequency * t + e.phase);
    return u;
  };
}

phs::Trajectory simulate_plant(const ExperimentConfig& config) {
  return phs::simulate(build_plant(config), config.excitation.initial_state,
                       excitation_signal(config), config.dataset.t0, config.dataset.t1,
                       config.dataset.samples, open_loop_steps());
}

phs::Trajectory generate_dataset(const ExperimentConfig& config) {
  config.validate();
  phs::Trajectory traj = simulate_plant(config);
  traj.outputs.reset();
  if (config.dataset.noise_variance > 0.0) {
    std::mt19937_64 rng(stream_seed(*config.seed, Stream::dataset));
    std::normal_distribution<double> noise(0.0, std::sqrt(config.dataset.noise_variance));
    for (Eigen::Index k = 0; k < traj.states.cols(); ++k) {
      for (Eigen::Index i = 0; i < traj.states.rows(); ++i) traj.states(i, k) += noise(rng);
    }
  }
  return traj;
}

NominalBundle load_nominal(const ExperimentConfig& config, const fs::path& out) {
  const fs::path path = out / artifact::model;
  if (!fs::exists(path)) throw std::runtime_error("missing artifact " + path.string());
  std::ifstream is(path);
  const json doc = json::parse(is);
  NominalBundle b;
  if (doc.at("format") == kExactFormat) {
    PlantConfig p = config.plant;
    const json& pj = doc.at("plant");
    p.mass = pj.at("mass");
    p.damping = pj.at("damping");
    p.stiffness = pj.at("stiffness");
    p.resistance = pj.at("resistance");
    p.rest_gap = pj.at("rest_gap");
    p.c0 = pj.at("c0");
    p.half_electrical_energy = pj.at("half_electrical_energy");
    const phs::PhsModel plant = phs::make_microactuator(plant_params(p));
    b.nominal = control::nominal_from_plant(plant);
    b.energy = control::energy_of(plant);
    b.damping = p.damping;
    return b;
  }
  b.gp = std::make_shared<const gp::GpPhsModel>(gp::load_model(path));
  b.nominal = control::nominal_from_gp(b.gp);
  b.energy = control::energy_of(b.gp);
  b.damping = gp::MicroactuatorStructure::damping(b.gp->hyper().structure.params);
  return b;
}

control::DesiredDynamics build_desired(const ExperimentConfig& config, const NominalBundle& nominal) {
  const double b_hat = config.desired.b_hat.value_or(nominal.damping);
  const auto [Jd, Rd] = control::microactuator_target_structure(b_hat, config.desired.rd_inverse);
  Vec shift = Vec::Zero(3);
  if (config.desired.hamiltonian == "shifted") {
    shift = control::minimize_energy(nominal.energy, Vec::Unit(3, 0) * config.plant.rest_gap);
  }
  return control::shifted_energy_target(Jd, Rd, nominal.energy, shift);
}

void stage_simulate(const ExperimentConfig& config, const fs::path& out) {
  in_stage("simulate", [&] {
    fs::create_directories(out);
    phs::write_csv(out / artifact::simulation, simulate_plant(config));
  });
}

void stage_generate(const ExperimentConfig& config, const fs::path& out) {
  in_stage("generate-data", [&] {
    fs::create_directories(out);
    phs::write_csv(out / artifact::dataset, generate_dataset(config));
  });
}

void stage_train(const ExperimentConfig& config, const fs::path& out) {
  in_stage("train", [&] {
    fs::create_directories(out);
    if (config.training.mode == "perfect") {
      const json doc = {{"format", kExactFormat}, {"version", 1}, {"plant", plant_json(config.plant)}};
      write_text(out / artifact::model, doc.dump(2) + "\n");
      write_text(out / artifact::training, json{{"mode", "perfect"}}.dump(2) + "\n");
      return;
    }
    require_artifact("train", out / artifact::dataset);
    const phs::Trajectory data = phs::read_trajectory_csv(out / artifact::dataset);
    const gp::FilteredDataset filtered =
        gp::filter_derivatives(data, config.filter.window, config.filter.order);
    write_filtered_csv(out / artifact::filtered, filtered);

    const auto& tc = config.training;
    gp::GpHyperparams init = gp::GpHyperparams::defaults(
        gp::microactuator_structure(tc.damping, tc.resistance), tc.noise_variance);
    init.signal_std = tc.signal_std;
    init.lengthscales.setConstant(tc.lengthscale);

    gp::TrainerConfig trainer;
    trainer.restarts = tc.restarts;
    trainer.max_iterations = tc.max_iterations;
    trainer.gradient_tolerance = tc.gradient_tolerance;
    trainer.init_spread = tc.init_spread;
    trainer.seed = stream_seed(*config.seed, Stream::training);

    gp::PosteriorOptions posterior;
    posterior.beta = Vec::Constant(3, tc.beta);
    posterior.risk = tc.risk;
    posterior.bound_scale =
        tc.bound_scale == "stddev" ? gp::BoundScale::stddev : gp::BoundScale::variance;
    posterior.hamiltonian_mode = tc.hamiltonian_mode == "line_integral"
                                     ? gp::HamiltonianMode::line_integral
                                     : gp::HamiltonianMode::closed_form;

    gp::TrainingResult result;
    const gp::GpPhsModel model = gp::train(filtered, init, trainer, posterior, &result);
    gp::save_model(out / artifact::model, model);

    json restarts = json::array();
    for (const auto& r : result.restarts) {
      restarts.push_back({{"nlml", r.failed ? json(nullptr) : json(r.nlml)},
                          {"gradient_norm", r.gradient_norm},
                          {"iterations", r.iterations},
                          {"converged", r.converged},
                          {"failed", r.failed}});
    }
    const auto& h = model.hyper();
    const json summary = {
        {"mode", "gp"},
        {"nlml", result.nlml},
        {"best_restart", result.best_restart},
        {"restarts", restarts},
        {"signal_std", h.signal_std},
        {"lengthscales", std::vector<double>(h.lengthscales.data(), h.lengthscales.data() + h.lengthscales.size())},
        {"noise_variances", std::vector<double>(h.noise_variances.data(), h.noise_variances.data() + h.noise_variances.size())},
        {"damping", gp::MicroactuatorStructure::damping(h.structure.params)},
        {"resistance", gp::MicroactuatorStructure::resistance(h.structure.params)},
        {"jitter", model.jitter()}};
    write_text(out / artifact::training, summary.dump(2) + "\n");
  });
}

void stage_plan(const ExperimentConfig& config, const fs::path& out) {
  in_stage("plan", [&] {
    const NominalBundle nominal = load_nominal(config, out);
    const control::DesiredDynamics desired = build_desired(config, nominal);
    const auto& dc = config.desired;
    const auto& rc = config.reference;

    const control::PrimaryReference primary =
        control::air_gap_reference(rc.rest_gap, rc.slope, rc.amplitude, rc.frequency);
    Vec xd0 = rc.seed_state;
    xd0(0) = primary.value(rc.t0)(0);
    const control::HdValidation v = control::validate_hd_minimum(
        desired, xd0, Vec::Constant(3, dc.validate_lower), Vec::Constant(3, dc.validate_upper),
        dc.validate_resolution);
    write_text(out / artifact::hd_validation,
               fmt::format("candidate = {}\npassed = {}\nargmin = {}\nnearest_to_zero = {}\n"
                           "min_value = {:.17g}\ngap = {:.17g}\nbox = [{:.17g}, {:.17g}]^3\n"
                           "resolution = {}\n",
                           dc.hamiltonian, v.passed ? "true" : "false", vec_text(v.argmin),
                           vec_text(v.nearest_to_zero), v.min_value, v.gap, dc.validate_lower,
                           dc.validate_upper, dc.validate_resolution));
    if (!v.passed) {
      throw StageError("plan", fmt::format("desired Hamiltonian has its grid minimum at xbar = ({}) "
                                           "instead of zero tracking error",
                                           vec_text(v.argmin)));
    }

    control::PlanOptions po;
    po.t0 = rc.t0;
    po.t1 = rc.t1;
    po.grid_step = config.plan_step();
    po.seed_state = rc.seed_state;
    po.least_squares = rc.infeasible == "least_squares";
    const control::ReferencePlan plan =
        control::solve_reference_plan(nominal.nominal, desired, primary, po);
    control::write_csv(out / artifact::plan, plan);

    // Independent recheck of the matching equation on the grid, and of the
    // stored derivative against the state interpolant.
    double max_residual = 0.0;
    int unmatched = 0;
    double last_unmatched = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < plan.times().size(); ++k) {
      const double t = plan.times()[k];
      const Vec r = control::matching_residual(nominal.nominal, desired, plan,
                                               plan.states().col(static_cast<Eigen::Index>(k)), t);
      const double rk = r.cwiseAbs().maxCoeff();
      max_residual = std::max(max_residual, rk);
      if (rk > 1e-6) {
        ++unmatched;
        last_unmatched = t;
      }
    }
    double node_mismatch = 0.0;
    double midpoint_mismatch = 0.0;
    const double h = 1e-5;
    for (std::size_t k = 1; k + 1 < plan.times().size(); ++k) {
      const double t = plan.times()[k];
      const double tm = t + 0.5 * plan.step();
      const Vec fd = (plan.state(t + h) - plan.state(t - h)) / (2.0 * h);
      const Vec fdm = (plan.state(tm + h) - plan.state(tm - h)) / (2.0 * h);
      node_mismatch = std::max(node_mismatch, (fd - plan.derivative(t)).cwiseAbs().maxCoeff());
      midpoint_mismatch =
          std::max(midpoint_mismatch, (fdm - plan.derivative(tm)).cwiseAbs().maxCoeff());
    }
    write_text(out / artifact::plan_report,
               fmt::format("grid_points = {}\ngrid_step = {:.17g}\nmax_matching_residual = {:.17g}\n"
                           "max_derivative_mismatch = {:.17g}\n"
                           "max_derivative_mismatch_midpoint = {:.17g}\n"
                           "unmatched_nodes = {}\nlast_unmatched_time = {:.17g}\n",
                           plan.times().size(), plan.step(), max_residual, node_mismatch,
                           midpoint_mismatch, unmatched, last_unmatched));
  });
}

void stage_verify(const ExperimentConfig& config, const fs::path& out) {
  in_stage("verify", [&] {
    require_artifact("verify", out / artifact::plan);
    const NominalBundle nominal = load_nominal(config, out);
    const control::DesiredDynamics desired = build_desired(config, nominal);
    const control::ReferencePlan plan = control::read_plan_csv(out / artifact::plan);
    control::ConditionSampling s;
    s.samples_per_radius = config.verify.samples_per_radius;
    s.time_samples = config.verify.time_samples;
    s.max_radius = config.verify.max_radius;
    s.radial_levels = config.verify.radial_levels;
    s.radius_tolerance = config.verify.radius_tolerance;
    s.seed = stream_seed(*config.seed, Stream::verify);
    const control::ConditionReport report =
        control::verify_dissipation_condition(nominal.nominal, desired, plan, s);
    control::write_summary(out / artifact::condition_report, report);
    control::write_margins_csv(out / artifact::condition_margins, report);
  });
}

void stage_control(const ExperimentConfig& config, const fs::path& out) {
  in_stage("control", [&] {
    require_artifact("control", out / artifact::plan);
    const NominalBundle nominal = load_nominal(config, out);
    auto plan = std::make_shared<const control::ReferencePlan>(
        control::read_plan_csv(out / artifact::plan));
    const control::TrackingController controller(nominal.nominal, build_desired(config, nominal),
                                                 plan);
    const auto& cc = config.closed_loop;
    const Vec x0 = plan->state(config.reference.t0) + cc.perturbation;
    const std::vector<double> times = phs::uniform_grid(config.reference.t0, cc.t1, cc.samples);
    phs::StepControl steps;
    steps.abs_tol = cc.abs_tol;
    steps.rel_tol = cc.rel_tol;
    const control::ClosedLoopRun run =
        control::run_closed_loop(build_plant(config), controller, x0, times, nullptr, steps);
    phs::write_csv(out / artifact::closed_loop, run.trajectory);

    std::ofstream os(out / artifact::closed_loop_storage);
    if (!os) throw std::runtime_error("cannot write closed-loop storage");
    const auto n = run.references.rows();
    const auto m = run.port_outputs.rows();
    std::string header = "t,Hd";
    for (Eigen::Index i = 1; i <= n; ++i) header += fmt::format(",xd{}", i);
    for (Eigen::Index i = 1; i <= m; ++i) header += fmt::format(",yex{}", i);
    os << header << '\n';
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto c = static_cast<Eigen::Index>(k);
      std::string row = fmt::format("{:.17g},{:.17g}", times[k], run.storage[k]);
      for (Eigen::Index i = 0; i < n; ++i) row += fmt::format(",{:.17g}", run.references(i, c));
      for (Eigen::Index i = 0; i < m; ++i) row += fmt::format(",{:.17g}", run.port_outputs(i, c));
      os << row << '\n';
    }
    os.close();
    emit_figure_data(out);
  });
}

MetricsReport run_pipeline(const ExperimentConfig& config, const fs::path& out) {
  in_stage("config", [&] { config.validate(); });
  fs::create_directories(out);
  write_text(out / artifact::config, serialize_config(config));

  std::map<std::string, double> timings;
  auto timed = [&](const std::string& name, auto&& stage) {
    const auto start = std::chrono::steady_clock::now();
    stage(config, out);
    timings[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  timed("simulate", stage_simulate);
  timed("generate", stage_generate);
  timed("train", stage_train);
  timed("plan", stage_plan);
  timed("verify", stage_verify);
  timed("control", stage_control);

  MetricsReport report;
  in_stage("report", [&] {
    report = compute_metrics(config, out);
    write_metrics_json(out / artifact::metrics, report);
    report.timings = timings;
    write_timings_json(out / artifact::timings, report);
  });
  return report;
}

}  // namespace phslab::harness
