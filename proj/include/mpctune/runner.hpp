#pragma once

#include "mpctune/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mpctune::runner {

struct CommandOptions {
  std::optional<std::string> out_dir;                  // --out
  std::optional<std::vector<std::uint64_t>> seeds;     // --seeds
  std::optional<std::string> theta_path;               // --theta
  bool dump_trajectories = false;                      // --dump-trajectories
};

/// Output directory resolution: --out, then config.out_dir, then the
/// MPCTUNE_OUT environment variable, then "runs".
std::string resolve_out_dir(const config::ExperimentConfig& config,
                            const CommandOptions& options);

/// Each command returns a process exit code: 0 iff every requested seed
/// completed and all artifacts were written.
int cmd_tune(const config::ExperimentConfig& config, const CommandOptions& options);
int cmd_baseline(const config::ExperimentConfig& config, const CommandOptions& options);
int cmd_assess(const config::ExperimentConfig& config, const CommandOptions& options);
int cmd_simulate(const config::ExperimentConfig& config, const CommandOptions& options);

}  // namespace mpctune::runner
