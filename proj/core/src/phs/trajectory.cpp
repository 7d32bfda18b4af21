#include "phslab/phs/trajectory.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

namespace phslab::phs {

void Trajectory::validate() const {
  const auto k = static_cast<Eigen::Index>(times.size());
  if (states.cols() != k || inputs.cols() != k || (outputs && outputs->cols() != k)) {
    throw InvalidArgument("Trajectory: column counts do not match the number of times");
  }
  if (outputs && outputs->rows() != inputs.rows()) {
    throw InvalidArgument("Trajectory: outputs must have the input dimension");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InvalidArgument(fmt::format("Trajectory: times not strictly increasing at index {}", i));
    }
  }
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  traj.validate();
  const int n = traj.dim_state();
  const int m = traj.dim_input();
  std::string header = "t";
  for (int i = 1; i <= n; ++i) header += fmt::format(",x{}", i);
  for (int i = 1; i <= m; ++i) header += fmt::format(",u{}", i);
  if (traj.outputs) {
    for (int i = 1; i <= m; ++i) header += fmt::format(",y{}", i);
  }
  os << header << '\n';
  for (int k = 0; k < traj.size(); ++k) {
    std::string row = fmt::format("{:.17g}", traj.times[k]);
    for (int i = 0; i < n; ++i) row += fmt::format(",{:.17g}", traj.states(i, k));
    for (int i = 0; i < m; ++i) row += fmt::format(",{:.17g}", traj.inputs(i, k));
    if (traj.outputs) {
      for (int i = 0; i < m; ++i) row += fmt::format(",{:.17g}", (*traj.outputs)(i, k));
    }
    os << row << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(os, traj);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("trajectory CSV: missing header");
  const auto header = split(line);
  if (header.empty() || header[0] != "t") throw InvalidArgument("trajectory CSV: bad header");
  int n = 0, m = 0, p = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const char kind = header[c].empty() ? '?' : header[c][0];
    if (kind == 'x') ++n;
    else if (kind == 'u') ++m;
    else if (kind == 'y') ++p;
    else throw InvalidArgument("trajectory CSV: unknown column " + header[c]);
  }
  if (p != 0 && p != m) throw InvalidArgument("trajectory CSV: output/input count mismatch");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw InvalidArgument("trajectory CSV: ragged row");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }

  Trajectory traj;
  const auto k = static_cast<Eigen::Index>(rows.size());
  traj.states.resize(n, k);
  traj.inputs.resize(m, k);
  if (p > 0) traj.outputs = Mat(p, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& row = rows[j];
    traj.times.push_back(row[0]);
    for (int i = 0; i < n; ++i) traj.states(i, j) = row[1 + i];
    for (int i = 0; i < m; ++i) traj.inputs(i, j) = row[1 + n + i];
    for (int i = 0; i < p; ++i) (*traj.outputs)(i, j) = row[1 + n + m + i];
  }
  traj.validate();
  return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_trajectory_csv(is);
}

}  // namespace phslab::phs
