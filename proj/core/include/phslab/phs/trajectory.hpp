#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "phslab/common.hpp"

namespace phslab::phs {

/// Uniformly or non-uniformly sampled trajectory. Column k of each matrix
/// belongs to times[k].
struct Trajectory {
  std::vector<double> times;
  Mat states;                  // n x K
  Mat inputs;                  // m x K
  std::optional<Mat> outputs;  // m x K

  [[nodiscard]] int size() const { return static_cast<int>(times.size()); }
  [[nodiscard]] int dim_state() const { return static_cast<int>(states.rows()); }
  [[nodiscard]] int dim_input() const { return static_cast<int>(inputs.rows()); }

  /// Throws InvalidArgument unless times are strictly increasing and all
  /// matrices have one column per sample.
  void validate() const;
};

/// CSV with header t,x1..xn,u1..um[,y1..ym]; 17 significant digits.
void write_csv(std::ostream& os, const Trajectory& traj);
void write_csv(const std::filesystem::path& path, const Trajectory& traj);
/// Reads the CSV written by write_csv. Dimensions are recovered from the
/// header.
Trajectory read_trajectory_csv(std::istream& is);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace phslab::phs
