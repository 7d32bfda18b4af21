#include "phslab/harness/metrics.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "phslab/control/conditions.hpp"
#include "phslab/control/tracking.hpp"
#include "phslab/harness/pipeline.hpp"
#include "phslab/phs/energy.hpp"
#include "table.hpp"

namespace phslab::harness {

namespace fs = std::filesystem;
using json = nlohmann::json;

MetricsReport compute_metrics(const ExperimentConfig& config, const fs::path& out) {
  if (!fs::is_directory(out)) {
    throw StageError("report", "output directory " + out.string() + " does not exist");
  }
  for (const char* name : {artifact::simulation, artifact::hd_validation, artifact::plan_report,
                           artifact::condition_report, artifact::closed_loop,
                           artifact::closed_loop_storage}) {
    if (!fs::exists(out / name)) {
      throw StageError("report", "missing artifact " + (out / name).string());
    }
  }
  MetricsReport r;
  const phs::PhsModel plant = build_plant(config);

  const phs::Trajectory loop = phs::read_trajectory_csv(out / artifact::closed_loop);
  const detail::Table storage = detail::read_table(out / artifact::closed_loop_storage);
  const int n = loop.dim_state();
  for (int i = 0; i < n; ++i) {
    const Vec xd = storage.column(fmt::format("xd{}", i + 1));
    const Vec err = (loop.states.row(i).transpose() - xd).cwiseAbs();
    r.max_abs_error.push_back(err.maxCoeff());
    r.mean_abs_error.push_back(err.mean());
  }
  const Vec hd = storage.column("Hd");
  const std::vector<double> series(hd.data(), hd.data() + hd.size());
  r.hd_increase_tolerance = config.closed_loop.increase_tolerance;
  r.hd_increase_events = control::count_increases(series, r.hd_increase_tolerance);
  for (std::size_t k = 1; k < series.size(); ++k) {
    r.hd_max_increase = std::max(r.hd_max_increase, series[k] - series[k - 1]);
  }
  r.hd_initial = series.front();
  r.hd_final = series.back();
  r.closed_loop_horizon = loop.times.back();
  r.closed_loop_energy_residual = phs::energy_balance_residual(plant, loop).max_residual;
  r.open_loop_energy_residual =
      phs::energy_balance_residual(plant, phs::read_trajectory_csv(out / artifact::simulation))
          .max_residual;

  const control::ConditionReport cond = control::read_summary(out / artifact::condition_report);
  if (std::isfinite(cond.epsilon)) r.epsilon = cond.epsilon;
  r.condition_satisfied = cond.satisfied;
  r.condition_min_margin = cond.min_margin;
  r.condition_fraction_negative = cond.fraction_negative;
  r.offreference_matching_residual = cond.max_matching_residual;

  const auto hv = detail::read_key_values(out / artifact::hd_validation);
  r.hd_validation_passed = hv.at("passed") == "true";
  r.hd_validation_gap = std::stod(hv.at("gap"));
  const auto pr = detail::read_key_values(out / artifact::plan_report);
  r.plan_max_matching_residual = std::stod(pr.at("max_matching_residual"));
  r.plan_derivative_mismatch = std::stod(pr.at("max_derivative_mismatch"));
  return r;
}

void write_metrics_json(const fs::path& path, const MetricsReport& r) {
  const json doc = {
      {"schema_version", MetricsReport::schema_version},
      {"tracking", {{"max_abs_error", r.max_abs_error}, {"mean_abs_error", r.mean_abs_error},
                    {"horizon", r.closed_loop_horizon}}},
      {"lyapunov", {{"increase_events", r.hd_increase_events},
                    {"increase_tolerance", r.hd_increase_tolerance},
                    {"max_increase", r.hd_max_increase},
                    {"initial", r.hd_initial},
                    {"final", r.hd_final}}},
      {"energy_balance", {{"open_loop_max_residual", r.open_loop_energy_residual},
                          {"closed_loop_max_residual", r.closed_loop_energy_residual}}},
      {"conditions", {{"epsilon", r.epsilon ? json(*r.epsilon) : json(nullptr)},
                      {"certified", r.epsilon.has_value()},
                      {"satisfied", r.condition_satisfied},
                      {"min_margin", r.condition_min_margin},
                      {"fraction_negative", r.condition_fraction_negative},
                      {"offreference_matching_residual", r.offreference_matching_residual}}},
      {"hd_validation", {{"passed", r.hd_validation_passed}, {"gap", r.hd_validation_gap}}},
      {"plan", {{"max_matching_residual", r.plan_max_matching_residual},
                {"max_derivative_mismatch", r.plan_derivative_mismatch}}}};
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << doc.dump(2) << '\n';
}

MetricsReport read_metrics_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  const json doc = json::parse(is);
  if (doc.at("schema_version") != MetricsReport::schema_version) {
    throw std::runtime_error("unsupported metrics schema version");
  }
  MetricsReport r;
  r.max_abs_error = doc.at("tracking").at("max_abs_error").get<std::vector<double>>();
  r.mean_abs_error = doc.at("tracking").at("mean_abs_error").get<std::vector<double>>();
  r.closed_loop_horizon = doc.at("tracking").at("horizon");
  const auto& l = doc.at("lyapunov");
  r.hd_increase_events = l.at("increase_events");
  r.hd_increase_tolerance = l.at("increase_tolerance");
  r.hd_max_increase = l.at("max_increase");
  r.hd_initial = l.at("initial");
  r.hd_final = l.at("final");
  r.open_loop_energy_residual = doc.at("energy_balance").at("open_loop_max_residual");
  r.closed_loop_energy_residual = doc.at("energy_balance").at("closed_loop_max_residual");
  const auto& c = doc.at("conditions");
  if (!c.at("epsilon").is_null()) r.epsilon = c.at("epsilon").get<double>();
  r.condition_satisfied = c.at("satisfied");
  r.condition_min_margin = c.at("min_margin");
  r.condition_fraction_negative = c.at("fraction_negative");
  r.offreference_matching_residual = c.at("offreference_matching_residual");
  r.hd_validation_passed = doc.at("hd_validation").at("passed");
  r.hd_validation_gap = doc.at("hd_validation").at("gap");
  r.plan_max_matching_residual = doc.at("plan").at("max_matching_residual");
  r.plan_derivative_mismatch = doc.at("plan").at("max_derivative_mismatch");
  return r;
}

void write_timings_json(const fs::path& path, const MetricsReport& r) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << json(r.timings).dump(2) << '\n';
}

std::string summarize(const MetricsReport& r) {
  std::string s;
  s += "tracking error (max |x_i - xd_i|):";
  for (double e : r.max_abs_error) s += fmt::format(" {:.4g}", e);
  s += fmt::format("\nHd: {:.6g} -> {:.6g}, {} increase events above {:.1g} (largest {:.3g})\n",
                   r.hd_initial, r.hd_final, r.hd_increase_events, r.hd_increase_tolerance,
                   r.hd_max_increase);
  s += fmt::format("energy balance residual: open loop {:.3g}, closed loop {:.3g}\n",
                   r.open_loop_energy_residual, r.closed_loop_energy_residual);
  s += fmt::format("dissipation condition: satisfied = {}, epsilon = {}, min margin {:.4g}\n",
                   r.condition_satisfied,
                   r.epsilon ? fmt::format("{:.4g}", *r.epsilon) : std::string("none (fails at every radius)"),
                   r.condition_min_margin);
  s += fmt::format("Hd minimum validation: {} (gap {:.3g}); plan residual {:.3g}\n",
                   r.hd_validation_passed ? "passed" : "failed", r.hd_validation_gap,
                   r.plan_max_matching_residual);
  return s;
}

}  // namespace phslab::harness
