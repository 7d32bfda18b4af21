#include "phslab/control/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <string>

#include <fmt/format.h>

namespace phslab::control {

double worst_case_margin(const Vec& grad, const Mat& Rd, const Vec& envelope) {
  return grad.dot(Rd * grad) - grad.cwiseAbs().dot(envelope);
}

namespace {

struct Evaluator {
  const NominalModel& model;
  const DesiredDynamics& desired;
  const ReferencePlan& plan;
  std::vector<double> times;
  std::vector<Vec> xd;
  std::vector<Vec> xd_dot;

  [[nodiscard]] MarginSample evaluate(std::size_t time_index, const Vec& direction,
                                      double radius) const {
    MarginSample s;
    s.time = times[time_index];
    s.radius = radius;
    s.error = radius * direction;
    const Vec x = xd[time_index] + s.error;
    const Vec grad = desired.energy_gradient(x, xd[time_index]);
    const Mat Rd = desired.damping(s.error);
    const Vec env = model.envelope ? model.envelope(x) : Vec::Zero(x.size()).eval();
    s.dissipation = grad.dot(Rd * grad);
    s.worst_perturbation = grad.cwiseAbs().dot(env);
    s.margin = s.dissipation - s.worst_perturbation;
    s.matching_residual =
        matching_residual(model, desired, x, xd[time_index], xd_dot[time_index]).norm();
    return s;
  }
};

}  // namespace

ConditionReport verify_dissipation_condition(const NominalModel& model,
                                             const DesiredDynamics& desired,
                                             const ReferencePlan& plan,
                                             const ConditionSampling& sampling) {
  if (sampling.samples_per_radius < 1 || sampling.time_samples < 1 ||
      sampling.radial_levels < 1 || !(sampling.max_radius > 0.0) ||
      !(sampling.radius_tolerance > 0.0)) {
    throw InvalidArgument("verify_dissipation_condition: invalid sampling settings");
  }
  const int n = model.dim_state;
  Evaluator ev{model, desired, plan, {}, {}, {}};
  for (int i = 0; i < sampling.time_samples; ++i) {
    const double t = sampling.time_samples == 1
                         ? plan.t_begin()
                         : plan.t_begin() + (plan.t_end() - plan.t_begin()) * i /
                                                (sampling.time_samples - 1);
    ev.times.push_back(t);
    ev.xd.push_back(plan.state(t));
    ev.xd_dot.push_back(plan.derivative(t));
  }

  // Directions and time slots are drawn once and reused at every radius.
  std::mt19937_64 rng(sampling.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, ev.times.size() - 1);
  std::vector<Vec> directions;
  std::vector<std::size_t> slots;
  directions.reserve(static_cast<std::size_t>(sampling.samples_per_radius));
  for (int k = 0; k < sampling.samples_per_radius; ++k) {
    Vec d(n);
    do {
      for (int i = 0; i < n; ++i) d(i) = normal(rng);
    } while (d.norm() < 1e-12);
    directions.push_back(d.normalized());
    slots.push_back(pick(rng));
  }

  ConditionReport report;
  report.sampling = sampling;
  auto level = [&](double radius, bool record) {
    bool ok = true;
    for (std::size_t k = 0; k < directions.size(); ++k) {
      MarginSample s = ev.evaluate(slots[k], directions[k], radius);
      ok = ok && s.margin >= 0.0;
      if (record) report.samples.push_back(std::move(s));
    }
    return ok;
  };

  // Reference itself (radius 0) once per time slot.
  bool zero_ok = true;
  for (std::size_t i = 0; i < ev.times.size(); ++i) {
    MarginSample s = ev.evaluate(i, Vec::Unit(n, 0), 0.0);
    zero_ok = zero_ok && s.margin >= 0.0;
    report.samples.push_back(std::move(s));
  }

  const int L = sampling.radial_levels;
  const double dr = sampling.max_radius / L;
  int first_failure = 0;  // largest failing level index, 0 when none
  for (int i = L; i >= 1; --i) {
    if (!level(dr * i, true)) {
      first_failure = i;
      break;
    }
  }
  if (first_failure == L) {
    report.epsilon = std::numeric_limits<double>::infinity();
  } else {
    double lo = dr * first_failure;
    double hi = dr * (first_failure + 1);
    if (first_failure == 0) {
      lo = 0.0;
      hi = dr;
      if (zero_ok) hi = 0.0;
    }
    while (hi - lo > sampling.radius_tolerance) {
      const double mid = 0.5 * (lo + hi);
      (level(mid, false) ? hi : lo) = mid;
    }
    report.epsilon = hi;
  }

  report.min_margin = std::numeric_limits<double>::infinity();
  int negative = 0;
  for (const auto& s : report.samples) {
    report.min_margin = std::min(report.min_margin, s.margin);
    report.max_worst_perturbation = std::max(report.max_worst_perturbation, s.worst_perturbation);
    if (s.radius > 0.0) {
      report.max_matching_residual = std::max(report.max_matching_residual, s.matching_residual);
    }
    if (s.margin < 0.0) ++negative;
  }
  report.fraction_negative =
      report.samples.empty() ? 0.0 : static_cast<double>(negative) / report.samples.size();
  report.satisfied = negative == 0;
  return report;
}

void write_summary(const std::filesystem::path& path, const ConditionReport& report) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto& s = report.sampling;
  os << "# dissipation condition: grad Hd^T Rd grad Hd >= sum_i |dHd/dxbar_i| envelope_i\n";
  os << fmt::format("satisfied = {}\n", report.satisfied ? "true" : "false");
  os << fmt::format("epsilon = {:.17g}\n", report.epsilon);
  os << fmt::format("certified = {}\n", std::isfinite(report.epsilon) ? "true" : "false");
  os << fmt::format("min_margin = {:.17g}\n", report.min_margin);
  os << fmt::format("fraction_negative = {:.17g}\n", report.fraction_negative);
  os << fmt::format("max_worst_perturbation = {:.17g}\n", report.max_worst_perturbation);
  os << fmt::format("max_offreference_matching_residual = {:.17g}\n",
                    report.max_matching_residual);
  os << fmt::format("samples = {}\n", report.samples.size());
  os << fmt::format("samples_per_radius = {}\n", s.samples_per_radius);
  os << fmt::format("time_samples = {}\n", s.time_samples);
  os << fmt::format("max_radius = {:.17g}\n", s.max_radius);
  os << fmt::format("radial_levels = {}\n", s.radial_levels);
  os << fmt::format("radius_tolerance = {:.17g}\n", s.radius_tolerance);
  os << fmt::format("seed = {}\n", s.seed);
}

void write_margins_csv(const std::filesystem::path& path, const ConditionReport& report) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto n = report.samples.empty() ? 0 : report.samples.front().error.size();
  std::string header = "t,radius";
  for (Eigen::Index i = 1; i <= n; ++i) header += fmt::format(",xbar{}", i);
  header += ",dissipation,worst_perturbation,margin,matching_residual";
  os << header << '\n';
  for (const auto& s : report.samples) {
    std::string row = fmt::format("{:.17g},{:.17g}", s.time, s.radius);
    for (Eigen::Index i = 0; i < n; ++i) row += fmt::format(",{:.17g}", s.error(i));
    row += fmt::format(",{:.17g},{:.17g},{:.17g},{:.17g}", s.dissipation, s.worst_perturbation,
                       s.margin, s.matching_residual);
    os << row << '\n';
  }
}

ConditionReport read_summary(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  auto num = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw InvalidArgument("condition summary: missing key " + key);
    return std::stod(it->second);
  };
  ConditionReport r;
  r.satisfied = kv["satisfied"] == "true";
  r.epsilon = num("epsilon");
  r.min_margin = num("min_margin");
  r.fraction_negative = num("fraction_negative");
  r.max_worst_perturbation = num("max_worst_perturbation");
  r.max_matching_residual = num("max_offreference_matching_residual");
  return r;
}

}  // namespace phslab::control
