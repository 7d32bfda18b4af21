#include "phslab/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace phslab::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
  }
  return v;
}

template <class Int>
Int to_int(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, text));
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, text));
}

Vec to_vec(const std::string& key, const std::string& text) {
  std::stringstream ss(text);
  std::vector<double> values;
  std::string item;
  while (ss >> item) values.push_back(to_double(key, item));
  if (values.empty()) throw ConfigError(key + ": empty vector");
  return Eigen::Map<Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string vec_text(const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? " " : "") + num(v(i));
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  [[nodiscard]] std::string name() const { return section + "." + key; }
};

template <class Access>
Field real(const char* section, const char* key, Access access) {
  const std::string name = std::string(section) + "." + key;
  return {section, key, [access](const ExperimentConfig& c) { return num(access(c)); },
          [access, name](ExperimentConfig& c, const std::string& v) { access(c) = to_double(name, v); }};
}

template <class Access>
Field integer(const char* section, const char* key, Access access) {
  const std::string name = std::string(section) + "." + key;
  return {section, key,
          [access](const ExperimentConfig& c) {
            return std::to_string(access(c));
          },
          [access, name](ExperimentConfig& c, const std::string& v) { access(c) = to_int<int>(name, v); }};
}

template <class Access>
Field flag(const char* section, const char* key, Access access) {
  const std::string name = std::string(section) + "." + key;
  return {section, key,
          [access](const ExperimentConfig& c) {
            return std::string(access(c) ? "true" : "false");
          },
          [access, name](ExperimentConfig& c, const std::string& v) { access(c) = to_bool(name, v); }};
}

template <class Access>
Field text(const char* section, const char* key, Access access) {
  return {section, key,
          [access](const ExperimentConfig& c) { return access(c); },
          [access](ExperimentConfig& c, const std::string& v) { access(c) = trim(v); }};
}

template <class Access>
Field vector(const char* section, const char* key, Access access) {
  const std::string name = std::string(section) + "." + key;
  return {section, key,
          [access](const ExperimentConfig& c) {
            return vec_text(access(c));
          },
          [access, name](ExperimentConfig& c, const std::string& v) { access(c) = to_vec(name, v); }};
}

// Optional real: "auto" stands for "derive from elsewhere".
template <class Access>
Field optional_real(const char* section, const char* key, Access access) {
  const std::string name = std::string(section) + "." + key;
  return {section, key,
          [access](const ExperimentConfig& c) {
            const auto& v = access(c);
            return v ? num(*v) : std::string("auto");
          },
          [access, name](ExperimentConfig& c, const std::string& v) {
            if (trim(v) == "auto") {
              access(c).reset();
            } else {
              access(c) = to_double(name, v);
            }
          }};
}

#define ACCESS(member) [](auto& c) -> auto& { return c.member; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      text("plant", "model", ACCESS(plant.model)),
      real("plant", "mass", ACCESS(plant.mass)),
      real("plant", "damping", ACCESS(plant.damping)),
      real("plant", "stiffness", ACCESS(plant.stiffness)),
      real("plant", "resistance", ACCESS(plant.resistance)),
      real("plant", "rest_gap", ACCESS(plant.rest_gap)),
      real("plant", "c0", ACCESS(plant.c0)),
      flag("plant", "half_electrical_energy", ACCESS(plant.half_electrical_energy)),
      real("excitation", "amplitude", ACCESS(excitation.amplitude)),
      real("excitation", "frequency", ACCESS(excitation.frequency)),
      real("excitation", "phase", ACCESS(excitation.phase)),
      vector("excitation", "initial_state", ACCESS(excitation.initial_state)),
      integer("dataset", "samples", ACCESS(dataset.samples)),
      real("dataset", "t0", ACCESS(dataset.t0)),
      real("dataset", "t1", ACCESS(dataset.t1)),
      real("dataset", "noise_variance", ACCESS(dataset.noise_variance)),
      integer("filter", "window", ACCESS(filter.window)),
      integer("filter", "order", ACCESS(filter.order)),
      text("training", "mode", ACCESS(training.mode)),
      integer("training", "restarts", ACCESS(training.restarts)),
      integer("training", "max_iterations", ACCESS(training.max_iterations)),
      real("training", "gradient_tolerance", ACCESS(training.gradient_tolerance)),
      real("training", "init_spread", ACCESS(training.init_spread)),
      real("training", "signal_std", ACCESS(training.signal_std)),
      real("training", "lengthscale", ACCESS(training.lengthscale)),
      real("training", "noise_variance", ACCESS(training.noise_variance)),
      real("training", "damping", ACCESS(training.damping)),
      real("training", "resistance", ACCESS(training.resistance)),
      real("training", "beta", ACCESS(training.beta)),
      real("training", "risk", ACCESS(training.risk)),
      text("training", "bound_scale", ACCESS(training.bound_scale)),
      text("training", "hamiltonian_mode", ACCESS(training.hamiltonian_mode)),
      real("desired", "rd_inverse", ACCESS(desired.rd_inverse)),
      optional_real("desired", "b_hat", ACCESS(desired.b_hat)),
      text("desired", "hamiltonian", ACCESS(desired.hamiltonian)),
      real("desired", "validate_lower", ACCESS(desired.validate_lower)),
      real("desired", "validate_upper", ACCESS(desired.validate_upper)),
      integer("desired", "validate_resolution", ACCESS(desired.validate_resolution)),
      real("reference", "rest_gap", ACCESS(reference.rest_gap)),
      real("reference", "slope", ACCESS(reference.slope)),
      real("reference", "amplitude", ACCESS(reference.amplitude)),
      real("reference", "frequency", ACCESS(reference.frequency)),
      real("reference", "t0", ACCESS(reference.t0)),
      real("reference", "t1", ACCESS(reference.t1)),
      optional_real("reference", "grid_step", ACCESS(reference.grid_step)),
      vector("reference", "seed_state", ACCESS(reference.seed_state)),
      text("reference", "infeasible", ACCESS(reference.infeasible)),
      real("closed_loop", "t1", ACCESS(closed_loop.t1)),
      integer("closed_loop", "samples", ACCESS(closed_loop.samples)),
      vector("closed_loop", "perturbation", ACCESS(closed_loop.perturbation)),
      real("closed_loop", "abs_tol", ACCESS(closed_loop.abs_tol)),
      real("closed_loop", "rel_tol", ACCESS(closed_loop.rel_tol)),
      real("closed_loop", "increase_tolerance", ACCESS(closed_loop.increase_tolerance)),
      integer("verify", "samples_per_radius", ACCESS(verify.samples_per_radius)),
      integer("verify", "time_samples", ACCESS(verify.time_samples)),
      real("verify", "max_radius", ACCESS(verify.max_radius)),
      integer("verify", "radial_levels", ACCESS(verify.radial_levels)),
      real("verify", "radius_tolerance", ACCESS(verify.radius_tolerance)),
      text("run", "name", ACCESS(name)),
      Field{"run", "seed",
            [](const ExperimentConfig& c) {
              return c.seed ? std::to_string(*c.seed) : std::string("none");
            },
            [](ExperimentConfig& c, const std::string& v) {
              if (trim(v) == "none") {
                c.seed.reset();
              } else {
                c.seed = to_int<std::uint64_t>("run.seed", v);
              }
            }},
  };
  return table;
}

#undef ACCESS

const Field& find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields()) {
    if (f.section == section && f.key == key) return f;
  }
  throw ConfigError(fmt::format("unknown configuration key '{}.{}'", section, key));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(seed.has_value(), "run.seed is mandatory (set it in the file or pass --seed)");
  require(plant.model == "microactuator", "plant.model: only 'microactuator' is supported");
  require(plant.mass > 0 && plant.damping >= 0 && plant.stiffness > 0 && plant.resistance > 0 &&
              plant.c0 > 0 && std::isfinite(plant.rest_gap),
          "plant: mass, stiffness, resistance and c0 must be positive, damping nonnegative");
  require(excitation.initial_state.size() == 3 && excitation.initial_state.allFinite(),
          "excitation.initial_state must have 3 finite entries");
  require(std::isfinite(excitation.amplitude) && std::isfinite(excitation.frequency) &&
              std::isfinite(excitation.phase),
          "excitation: values must be finite");
  require(dataset.samples >= 10, "dataset.samples must be >= 10");
  require(dataset.t1 > dataset.t0, "dataset.t1 must exceed dataset.t0");
  require(dataset.noise_variance >= 0 && std::isfinite(dataset.noise_variance),
          "dataset.noise_variance must be finite and >= 0");
  require(filter.window >= 3 && filter.window % 2 == 1 && filter.order >= 1 &&
              filter.window >= filter.order + 2 && filter.window <= dataset.samples,
          "filter: window must be odd, >= order + 2 and <= dataset.samples");
  require(training.mode == "gp" || training.mode == "perfect",
          "training.mode must be 'gp' or 'perfect'");
  require(training.restarts >= 1 && training.max_iterations >= 1,
          "training.restarts and training.max_iterations must be >= 1");
  require(training.gradient_tolerance > 0 && training.init_spread >= 0,
          "training.gradient_tolerance must be positive, init_spread nonnegative");
  require(training.signal_std > 0 && training.lengthscale > 0 && training.noise_variance > 0 &&
              training.damping > 0 && training.resistance > 0,
          "training: initial hyperparameters must be positive");
  require(training.beta > 0 && std::isfinite(training.beta), "training.beta must be positive");
  require(training.risk > 0 && training.risk < 1, "training.risk must lie in (0, 1)");
  require(training.bound_scale == "variance" || training.bound_scale == "stddev",
          "training.bound_scale must be 'variance' or 'stddev'");
  require(training.hamiltonian_mode == "closed_form" || training.hamiltonian_mode == "line_integral",
          "training.hamiltonian_mode must be 'closed_form' or 'line_integral'");
  require(desired.rd_inverse >= 0 && std::isfinite(desired.rd_inverse),
          "desired.rd_inverse must be finite and >= 0");
  require(!desired.b_hat || *desired.b_hat >= 0, "desired.b_hat must be >= 0");
  require(desired.hamiltonian == "shifted" || desired.hamiltonian == "literal",
          "desired.hamiltonian must be 'shifted' or 'literal'");
  require(desired.validate_upper > desired.validate_lower && desired.validate_resolution >= 2 &&
              desired.validate_resolution <= 201,
          "desired: validation box must be nonempty, resolution in [2, 201]");
  require(reference.t1 > reference.t0, "reference.t1 must exceed reference.t0");
  require(!reference.grid_step || *reference.grid_step > 0, "reference.grid_step must be positive");
  require(reference.seed_state.size() == 3 && reference.seed_state.allFinite(),
          "reference.seed_state must have 3 finite entries");
  require(reference.infeasible == "error" || reference.infeasible == "least_squares",
          "reference.infeasible must be 'error' or 'least_squares'");
  require(closed_loop.t1 > reference.t0 && closed_loop.t1 <= reference.t1,
          "closed_loop.t1 must lie inside the reference horizon");
  require(closed_loop.samples >= 2, "closed_loop.samples must be >= 2");
  require(closed_loop.perturbation.size() == 3 && closed_loop.perturbation.allFinite(),
          "closed_loop.perturbation must have 3 finite entries");
  require(closed_loop.abs_tol > 0 && closed_loop.rel_tol > 0,
          "closed_loop tolerances must be positive");
  require(closed_loop.increase_tolerance >= 0, "closed_loop.increase_tolerance must be >= 0");
  require(verify.samples_per_radius >= 1 && verify.time_samples >= 1 && verify.radial_levels >= 1 &&
              verify.max_radius > 0 && verify.radius_tolerance > 0,
          "verify: sample counts and radii must be positive");
  require(!name.empty() && name.find('/') == std::string::npos,
          "run.name must be a nonempty file name");
}

double ExperimentConfig::dataset_step() const {
  return (dataset.t1 - dataset.t0) / (dataset.samples - 1);
}

double ExperimentConfig::plan_step() const {
  return reference.grid_step ? *reference.grid_step : dataset_step();
}

ExperimentConfig parse_config(std::istream& is) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("config syntax error at line {}: {}", e.line(), e.message()));
  }
  ExperimentConfig config;
  config.seed.reset();
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(fmt::format("key '{}' outside of a section", section));
    }
    for (const auto& [key, value] : body) {
      find_field(section, key).set(config, value.data());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  return parse_config(is);
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  std::string current;
  for (const auto& f : fields()) {
    if (f.section != current) {
      if (!current.empty()) out += '\n';
      out += "[" + f.section + "]\n";
      current = f.section;
    }
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
  }
  const std::string section = trim(assignment.substr(0, dot));
  const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
  find_field(section, key).set(config, assignment.substr(eq + 1));
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.name());
  return out;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace phslab::harness
