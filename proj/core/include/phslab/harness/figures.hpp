#pragma once

#include <filesystem>

namespace phslab::harness {

inline constexpr const char* figure_tracking = "figure_tracking.csv";    // t,x1,xd1
inline constexpr const char* figure_states = "figure_states.csv";        // t,x2,x3
inline constexpr const char* figure_input = "figure_input.csv";          // t,u
inline constexpr const char* figure_lyapunov = "figure_lyapunov.csv";    // t,Hd

/// Writes the four figure CSVs from closed_loop.csv and
/// closed_loop_storage.csv in `out`. Throws StageError ("figures") naming
/// the first missing artifact.
void emit_figure_data(const std::filesystem::path& out);

}  // namespace phslab::harness
