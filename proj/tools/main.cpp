#include "mpctune/config.hpp"
#include "mpctune/runner.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct CliArgs {
  std::string config_path;
  std::string out_dir;
  std::string theta_path;
  std::string seeds_arg;
  bool dump_trajectories = false;
};

void add_common(CLI::App* cmd, CliArgs& args, bool needs_theta) {
  cmd->add_option("--config", args.config_path, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--seeds", args.seeds_arg, "Comma-separated seed list, e.g. 1,2,3");
  if (needs_theta) {
    cmd->add_option("--theta", args.theta_path, "Tuning parameter file (JSON)")
        ->check(CLI::ExistingFile);
  }
}

mpctune::runner::CommandOptions to_options(const CliArgs& args) {
  mpctune::runner::CommandOptions options;
  if (!args.out_dir.empty()) options.out_dir = args.out_dir;
  if (!args.theta_path.empty()) options.theta_path = args.theta_path;
  if (!args.seeds_arg.empty()) {
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos < args.seeds_arg.size()) {
      const std::size_t comma = args.seeds_arg.find(',', pos);
      const std::string token =
          args.seeds_arg.substr(pos, comma == std::string::npos ? std::string::npos
                                                                : comma - pos);
      seeds.push_back(std::stoull(token));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    options.seeds = std::move(seeds);
  }
  options.dump_trajectories = args.dump_trajectories;
  return options;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop MPC auto-tuning with constrained Bayesian optimization"};
  app.require_subcommand(1);

  CliArgs args;
  auto* tune = app.add_subcommand("tune", "Run the BO tuning loop per seed");
  add_common(tune, args, false);
  auto* baseline =
      app.add_subcommand("baseline", "Open-loop PRBS identification baseline");
  add_common(baseline, args, false);
  auto* assess = app.add_subcommand("assess", "Monte-Carlo assessment of a theta file");
  add_common(assess, args, true);
  assess->add_flag("--dump-trajectories", args.dump_trajectories,
                   "Write one full-state CSV per replicate");
  auto* simulate = app.add_subcommand("simulate", "Single closed-loop trajectory");
  add_common(simulate, args, true);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = mpctune::config::load_config(args.config_path);
    const auto options = to_options(args);
    if (tune->parsed()) return mpctune::runner::cmd_tune(config, options);
    if (baseline->parsed()) return mpctune::runner::cmd_baseline(config, options);
    if (assess->parsed()) return mpctune::runner::cmd_assess(config, options);
    if (simulate->parsed()) return mpctune::runner::cmd_simulate(config, options);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
