// phs-lab: command line front end for the GP-PHS tracking-control pipeline.
//
// Exit status: 0 success, 1 stage failure, 2 configuration or usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phslab/harness/config.hpp"
#include "phslab/harness/metrics.hpp"
#include "phslab/harness/pipeline.hpp"

namespace fs = std::filesystem;
using namespace phslab::harness;

namespace {

constexpr int kOk = 0;
constexpr int kStageFailure = 1;
constexpr int kUsage = 2;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
  bool check_config = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "experiment configuration file");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "random seed (overrides run.seed)");
  cmd->add_option("--out", o.out, "output directory (default: $PHS_LAB_OUT/<name>-seed<seed>)");
  cmd->add_option("--override", o.overrides, "section.key=value, may be repeated");
  cmd->add_flag("--check-config", o.check_config, "validate the configuration and exit");
}

ExperimentConfig resolve_config(const CommonOptions& o) {
  ExperimentConfig config = load_config(o.config);
  for (const auto& ov : o.overrides) apply_override(config, ov);
  if (o.seed) config.seed = o.seed;
  config.validate();
  return config;
}

fs::path resolve_out(const CommonOptions& o, const ExperimentConfig& config) {
  if (!o.out.empty()) return o.out;
  const char* root = std::getenv("PHS_LAB_OUT");
  const fs::path base = root != nullptr && *root != '\0' ? fs::path(root) : fs::path("phs_lab_out");
  return base / (config.name + "-seed" + std::to_string(*config.seed));
}

void write_config(const fs::path& out, const ExperimentConfig& config) {
  fs::create_directories(out);
  std::ofstream(out / artifact::config) << serialize_config(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GP-PHS learning and passivity-based tracking control experiments"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    void (*stage)(const ExperimentConfig&, const fs::path&);
  };
  const std::vector<Command> stages = {
      {"simulate", "open-loop simulation of the plant under the excitation", stage_simulate},
      {"generate-data", "noisy training dataset", stage_generate},
      {"train", "filter the dataset and train the GP-PHS model", stage_train},
      {"plan", "validate Hd and solve the reference plan", stage_plan},
      {"verify", "check the dissipation condition and estimate epsilon", stage_verify},
      {"control", "closed-loop simulation and figure data", stage_control},
  };

  CommonOptions opts;
  std::vector<std::pair<CLI::App*, const Command*>> stage_cmds;
  for (const auto& s : stages) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, opts, true);
    stage_cmds.emplace_back(cmd, &s);
  }
  CLI::App* pipeline = app.add_subcommand("pipeline", "run every stage and write metrics");
  add_common(pipeline, opts, true);
  CLI::App* report = app.add_subcommand("report", "recompute metrics from existing artifacts");
  add_common(report, opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (report->parsed()) {
      // The report reads the run's own config unless one is given.
      if (opts.out.empty() && opts.config.empty()) {
        throw ConfigError("report needs --out or --config");
      }
      ExperimentConfig config;
      fs::path out;
      if (!opts.out.empty()) {
        out = opts.out;
        if (!fs::is_directory(out)) throw ConfigError("output directory " + out.string() + " does not exist");
        CommonOptions o = opts;
        if (o.config.empty()) o.config = (out / artifact::config).string();
        config = resolve_config(o);
      } else {
        config = resolve_config(opts);
        out = resolve_out(opts, config);
        if (!fs::is_directory(out)) throw ConfigError("output directory " + out.string() + " does not exist");
      }
      if (opts.check_config) {
        std::cout << serialize_config(config);
        return kOk;
      }
      const MetricsReport metrics = compute_metrics(config, out);
      write_metrics_json(out / artifact::metrics, metrics);
      std::cout << summarize(metrics);
      return kOk;
    }

    const ExperimentConfig config = resolve_config(opts);
    if (opts.check_config) {
      std::cout << serialize_config(config);
      return kOk;
    }
    const fs::path out = resolve_out(opts, config);
    if (pipeline->parsed()) {
      const MetricsReport metrics = run_pipeline(config, out);
      std::cout << summarize(metrics) << "artifacts in " << out.string() << '\n';
      return kOk;
    }
    for (const auto& [cmd, s] : stage_cmds) {
      if (cmd->parsed()) {
        write_config(out, config);
        s->stage(config, out);
        std::cout << s->name << ": done, artifacts in " << out.string() << '\n';
        return kOk;
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const StageError& e) {
    std::cerr << "stage failed: " << e.what() << '\n';
    return kStageFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStageFailure;
  }
  return kUsage;
}
