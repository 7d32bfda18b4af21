#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include "phslab/control/desired.hpp"
#include "phslab/harness/config.hpp"
#include "phslab/harness/metrics.hpp"
#include "phslab/phs/simulate.hpp"

namespace phslab::harness {

/// A pipeline stage failed; artifacts written so far are left in place.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  [[nodiscard]] const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// File names of the artifacts inside an output directory.
namespace artifact {
inline constexpr const char* config = "config.ini";
inline constexpr const char* simulation = "simulation.csv";
inline constexpr const char* dataset = "dataset.csv";
inline constexpr const char* filtered = "filtered.csv";
inline constexpr const char* model = "model.json";
inline constexpr const char* training = "training.json";
inline constexpr const char* hd_validation = "hd_validation.txt";
inline constexpr const char* plan = "plan.csv";
inline constexpr const char* plan_report = "plan_report.txt";
inline constexpr const char* condition_report = "condition_report.txt";
inline constexpr const char* condition_margins = "condition_margins.csv";
inline constexpr const char* closed_loop = "closed_loop.csv";
inline constexpr const char* closed_loop_storage = "closed_loop_storage.csv";
inline constexpr const char* metrics = "metrics.json";
inline constexpr const char* timings = "timings.json";
}  // namespace artifact

/// Independent random stream per stage: seed_seq{seed, stage}.
enum class Stream : std::uint32_t { dataset = 1, training = 2, verify = 3 };
std::uint64_t stream_seed(std::uint64_t seed, Stream stream);

phs::PhsModel build_plant(const ExperimentConfig& config);
phs::InputSignal excitation_signal(const ExperimentConfig& config);

/// Noise-free open-loop run on the dataset grid.
phs::Trajectory simulate_plant(const ExperimentConfig& config);
/// simulate_plant plus i.i.d. Gaussian state noise from the dataset stream.
phs::Trajectory generate_dataset(const ExperimentConfig& config);

/// Nominal model used for synthesis: the trained GP-PHS or, in perfect
/// mode, the exact plant.
struct NominalBundle {
  control::NominalModel nominal;
  control::EnergyFunction energy;
  double damping = 0.0;  // estimated (or exact) b
  std::shared_ptr<const gp::GpPhsModel> gp;
};

NominalBundle load_nominal(const ExperimentConfig& config, const std::filesystem::path& out);
control::DesiredDynamics build_desired(const ExperimentConfig& config, const NominalBundle& nominal);

// Stages. Each reads its inputs from `out`, writes its artifacts there and
// throws StageError on failure.
void stage_simulate(const ExperimentConfig& config, const std::filesystem::path& out);
void stage_generate(const ExperimentConfig& config, const std::filesystem::path& out);
void stage_train(const ExperimentConfig& config, const std::filesystem::path& out);
void stage_plan(const ExperimentConfig& config, const std::filesystem::path& out);
void stage_verify(const ExperimentConfig& config, const std::filesystem::path& out);
void stage_control(const ExperimentConfig& config, const std::filesystem::path& out);

/// simulate -> generate -> filter/train -> validate Hd -> plan -> verify ->
/// closed loop -> figures -> metrics. Writes metrics.json (deterministic)
/// and timings.json (wall clock, excluded from determinism).
MetricsReport run_pipeline(const ExperimentConfig& config, const std::filesystem::path& out);

}  // namespace phslab::harness
