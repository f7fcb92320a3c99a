#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heatchain/config.hpp"

namespace heatchain {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitCheckFailed = 4,
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  int jobs = 0;
  bool resume = false;
  /// Extended grid-refinement sweep for `verify`.
  bool sweep = false;
  /// Progress and diagnostics; nullptr silences them.
  std::ostream* log = nullptr;
};

/// Record of one run: what was read, which files were written, and how long each stage took.
class RunManifest {
 public:
  struct File {
    std::string name;
    std::uintmax_t bytes = 0;
    std::uint64_t fnv1a = 0;
  };

  std::string command;
  std::string config_path;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  int jobs = 0;
  int exit_code = 0;
  std::string error;
  std::vector<File> files;
  std::vector<std::pair<std::string, double>> timings;

  std::string to_json() const;
};

inline constexpr const char* kManifestName = "manifest.json";
std::string tool_version();

/// Output directory, seed and manifest shared by the stages of one command.
class RunContext {
 public:
  RunContext(const ExperimentConfig& cfg, const RunOptions& opts, std::string command);

  const ExperimentConfig& config() const { return cfg_; }
  const ModelParams& model() const { return cfg_.model; }
  const RunOptions& options() const { return opts_; }
  std::uint64_t seed() const { return seed_; }
  const std::filesystem::path& out() const { return out_; }
  RunManifest& manifest() { return manifest_; }

  /// Writes out()/name through `fill` and lists it in the manifest.
  void write(const std::string& name, const std::function<void(std::ostream&)>& fill);
  /// Runs `stage` and records its wall-clock time under `label`.
  void timed(const std::string& label, const std::function<void()>& stage);
  void log(const std::string& line) const;

  /// Critical sets of the model, computed on first use.
  const std::vector<CriticalSet>& critical_sets();

  void finish(int exit_code, const std::string& error = {});

 private:
  const ExperimentConfig& cfg_;
  RunOptions opts_;
  std::uint64_t seed_;
  std::filesystem::path out_;
  RunManifest manifest_;
  std::optional<std::vector<CriticalSet>> sets_;
};

int cmd_critical(RunContext& ctx);
int cmd_simulate(RunContext& ctx);
int cmd_action(RunContext& ctx);
int cmd_quasipotential(RunContext& ctx);
int cmd_measure(RunContext& ctx);
int cmd_verify(RunContext& ctx);

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"critical", "simulate", "action", "quasipotential", "measure", "verify"};
  return names;
}

/// Loads the config, runs the command, maps failures to exit codes and always writes the
/// manifest once the output directory exists. Error messages go to `err`.
int run_command(const std::string& command, const std::filesystem::path& config_path, const RunOptions& opts,
                std::ostream& err);

}  // namespace heatchain
