#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "phslab/common.hpp"

namespace phslab::harness::detail {

/// Numeric CSV with a header row.
struct Table {
  std::vector<std::string> columns;
  Mat values;  // rows = records

  [[nodiscard]] Vec column(const std::string& name) const;
};

Table read_table(const std::filesystem::path& path);

/// `key = value` lines; `#` comments are skipped.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

}  // namespace phslab::harness::detail
