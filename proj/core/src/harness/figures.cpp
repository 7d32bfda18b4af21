#include "phslab/harness/figures.hpp"

#include <fstream>

#include <fmt/format.h>

#include "phslab/harness/pipeline.hpp"
#include "table.hpp"

namespace phslab::harness {

namespace fs = std::filesystem;

namespace {

void write_columns(const fs::path& path, const std::string& header, const std::vector<Vec>& cols) {
  std::ofstream os(path);
  if (!os) throw StageError("figures", "cannot write " + path.string());
  os << header << '\n';
  for (Eigen::Index k = 0; k < cols.front().size(); ++k) {
    std::string row;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      row += fmt::format("{}{:.17g}", c ? "," : "", cols[c](k));
    }
    os << row << '\n';
  }
}

}  // namespace

void emit_figure_data(const fs::path& out) {
  for (const char* name : {artifact::closed_loop, artifact::closed_loop_storage}) {
    if (!fs::exists(out / name)) {
      throw StageError("figures", fmt::format("missing artifact {}", (out / name).string()));
    }
  }
  const detail::Table loop = detail::read_table(out / artifact::closed_loop);
  const detail::Table storage = detail::read_table(out / artifact::closed_loop_storage);
  const Vec t = loop.column("t");
  if (storage.values.rows() != t.size()) {
    throw StageError("figures", "closed-loop artifacts have different lengths");
  }
  write_columns(out / figure_tracking, "t,x1,xd1", {t, loop.column("x1"), storage.column("xd1")});
  write_columns(out / figure_states, "t,x2,x3", {t, loop.column("x2"), loop.column("x3")});
  write_columns(out / figure_input, "t,u", {t, loop.column("u1")});
  write_columns(out / figure_lyapunov, "t,Hd", {t, storage.column("Hd")});
}

}  // namespace phslab::harness
