#include "table.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "phslab/harness/config.hpp"

namespace phslab::harness::detail {

Vec Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::runtime_error("CSV has no column '" + name + "'");
  return values.col(std::distance(columns.begin(), it));
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path.string() + " is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
  }
  std::vector<double> flat;
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(ss, cell, ',')) {
      flat.push_back(std::stod(cell));
      ++count;
    }
    if (count != t.columns.size()) {
      throw std::runtime_error(path.string() + ": ragged row " + std::to_string(rows + 2));
    }
    ++rows;
  }
  const auto cols = static_cast<Eigen::Index>(t.columns.size());
  t.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), static_cast<Eigen::Index>(rows), cols);
  return t;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

}  // namespace phslab::harness::detail
