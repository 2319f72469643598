#pragma once

#include "mpctune/bo.hpp"
#include "mpctune/harness.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mpctune::config {

/// Fully resolved experiment configuration. Every benchmark constant has a
/// config key with its standard value as default; the feed concentration
/// plant.cA0 is the one key without a default and must appear in the file.
struct ExperimentConfig {
  std::string scenario = "noise_free";  // "noise_free" | "noisy"
  std::vector<std::uint64_t> seeds = {1};
  int budget = 40;
  int n_init = 5;
  int replicates = 1;  // M closed-loop replicates per evaluation
  int assess_runs = 100;
  std::string out_dir;        // resolved via --out, config, MPCTUNE_OUT, "runs"
  bool log_wall_time = false; // keep false for byte-reproducible logs
  int threads = 0;            // 0 = all available

  harness::ScenarioConfig scenario_config;
  math::Box theta_box = harness::tuning_box();
  bo::BoConfig bo;

  int prbs_points = 3000;
  int prbs_hold_steps = 100;

  /// The full configuration echoed into every artifact.
  nlohmann::ordered_json resolved() const;
};

/// Parses a config file, applying defaults and validating. Throws
/// std::runtime_error with a diagnostic on malformed input or a missing
/// plant.cA0.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const nlohmann::json& j);

/// Theta files: {"narx": [14 coefficients, cB row then TR row],
/// "backoff": b} or {"theta": [15 values]}.
harness::TuningParams load_theta(const std::string& path);
nlohmann::ordered_json theta_to_json(const harness::TuningParams& theta);

}  // namespace mpctune::config
