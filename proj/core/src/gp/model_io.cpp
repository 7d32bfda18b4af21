#include "phslab/gp/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace phslab::gp {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    rows.push_back(row);
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Vec vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Mat mat_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  Mat m(rows, cols);
  const auto& data = j.at("data");
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row = data.at(i).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw InvalidArgument("model file: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[c];
  }
  return m;
}

json structure_to_json(const StructureEstimate& s) {
  json j;
  j["family"] = s.family->name();
  j["params"] = to_json(s.params);
  j["param_names"] = s.family->param_names();
  if (const auto* c = dynamic_cast<const ConstantStructure*>(s.family.get())) {
    j["J"] = to_json(c->J());
    j["R"] = to_json(c->R());
    j["G"] = to_json(c->G());
  }
  return j;
}

StructureEstimate structure_from_json(const json& j) {
  const auto family = j.at("family").get<std::string>();
  StructureEstimate s;
  if (family == "microactuator") {
    s.family = std::make_shared<MicroactuatorStructure>();
  } else if (family == "constant") {
    s.family = std::make_shared<ConstantStructure>(mat_from(j.at("J")), mat_from(j.at("R")),
                                                   mat_from(j.at("G")));
  } else {
    throw InvalidArgument("model file: unknown structure family '" + family + "'");
  }
  s.params = vec_from(j.at("params"));
  return s;
}

}  // namespace

std::string serialize_model(const GpPhsModel& model) {
  const auto& h = model.hyper();
  const auto& o = model.options();
  const auto& d = model.data();
  json j;
  j["format"] = "phslab.gp_phs_model";
  j["version"] = kFormatVersion;
  j["hyperparameters"] = {{"signal_std", h.signal_std},
                          {"lengthscales", to_json(h.lengthscales)},
                          {"noise_variances", to_json(h.noise_variances)},
                          {"structure", structure_to_json(h.structure)}};
  j["posterior"] = {
      {"beta", to_json(o.beta)},
      {"risk", o.risk},
      {"bound_scale", o.bound_scale == BoundScale::variance ? "variance" : "stddev"},
      {"hamiltonian_mode",
       o.hamiltonian_mode == HamiltonianMode::closed_form ? "closed_form" : "line_integral"},
      {"reference_state", to_json(model.reference_state())},
      {"jitter", o.jitter}};
  j["training_data"] = {{"times", d.times},
                        {"states", to_json(d.states)},
                        {"derivatives", to_json(d.derivatives)},
                        {"inputs", to_json(d.inputs)},
                        {"mean_adjusted_derivatives", to_json(model.mean_adjusted())}};
  return j.dump(2);
}

GpPhsModel deserialize_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("model file: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "phslab.gp_phs_model") {
      throw InvalidArgument("model file: unexpected format tag");
    }
    if (j.at("version").get<int>() != kFormatVersion) {
      throw InvalidArgument("model file: unsupported version");
    }
    const auto& jh = j.at("hyperparameters");
    GpHyperparams h;
    h.signal_std = jh.at("signal_std").get<double>();
    h.lengthscales = vec_from(jh.at("lengthscales"));
    h.noise_variances = vec_from(jh.at("noise_variances"));
    h.structure = structure_from_json(jh.at("structure"));

    const auto& jp = j.at("posterior");
    PosteriorOptions o;
    o.beta = vec_from(jp.at("beta"));
    o.risk = jp.at("risk").get<double>();
    o.bound_scale =
        jp.at("bound_scale").get<std::string>() == "stddev" ? BoundScale::stddev : BoundScale::variance;
    o.hamiltonian_mode = jp.at("hamiltonian_mode").get<std::string>() == "line_integral"
                             ? HamiltonianMode::line_integral
                             : HamiltonianMode::closed_form;
    o.reference_state = vec_from(jp.at("reference_state"));
    o.jitter = jp.at("jitter").get<double>();

    const auto& jd = j.at("training_data");
    FilteredDataset d;
    d.times = jd.at("times").get<std::vector<double>>();
    d.states = mat_from(jd.at("states"));
    d.derivatives = mat_from(jd.at("derivatives"));
    d.inputs = mat_from(jd.at("inputs"));
    return GpPhsModel(std::move(h), std::move(d), std::move(o));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const GpPhsModel& model) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << serialize_model(model) << '\n';
}

GpPhsModel load_model(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace phslab::gp
