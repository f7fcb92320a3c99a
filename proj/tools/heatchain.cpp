#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <glog/logging.h>

#include "heatchain/commands.hpp"

int main(int argc, char** argv) {
  FLAGS_minloglevel = 2;
  google::InitGoogleLogging(argv[0]);

  CLI::App app{"Driven oscillator chain between two heat baths: critical sets, SDE simulation, "
               "minimum-action quasipotentials and invariant-measure estimates."};
  app.require_subcommand(1);
  app.set_version_flag("--version", heatchain::tool_version());

  std::string config;
  heatchain::RunOptions opts;
  std::uint64_t seed = 0;
  std::string out;
  const std::map<std::string, std::string> help{
      {"critical", "Locate and classify the critical sets of G"},
      {"simulate", "Integrate the SDE and write trajectories"},
      {"action", "Evaluate and minimize the action functional"},
      {"quasipotential", "Pairwise costs, graph weights and W on a grid"},
      {"measure", "Estimate log mu(D) over an eps grid and fit the decay rate"},
      {"verify", "Run the built-in consistency checks"},
  };
  for (const auto& name : heatchain::command_names()) {
    const auto it = help.find(name);
    auto* sub = app.add_subcommand(name, it == help.end() ? std::string{} : it->second);
    sub->add_option("--config", config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Global seed (overrides the config)");
    sub->add_option("--jobs", opts.jobs, "Worker threads (0: runtime default)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", out, "Output directory (overrides the config)");
    sub->add_flag("--resume", opts.resume, "Reuse converged costs cached by an earlier run");
    if (name == "verify") sub->add_flag("--sweep", opts.sweep, "Extended grid-refinement sweep");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : heatchain::kExitConfig;
  }
  const auto* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) opts.seed = seed;
  if (!out.empty()) opts.out = out;
  opts.log = &std::cerr;
  return heatchain::run_command(sub->get_name(), config, opts, std::cerr);
}
