#include "mpctune/runner.hpp"

#include "mpctune/parallel.hpp"
#include "mpctune/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

namespace mpctune::runner {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

/// Fixed float formatting for CSV cells: 17 significant digits round-trips
/// doubles exactly.
std::string fmt(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const ordered_json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

/// Closed-loop trajectory in the fixed simulate/baseline schema. The final
/// row carries the terminal state; its input and measurement cells are nan.
void write_trajectory_csv(const fs::path& path, const harness::ClosedLoopResult& result,
                          double dt) {
  auto out = open_out(path);
  out << "k,t,F,cB_true,TR_true,cB_meas,TR_meas,feasible\n";
  const std::size_t T = result.inputs.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k <= T; ++k) {
    const auto& state = result.states[k];
    const double F = k < T ? result.inputs[k] : nan;
    const double cB_meas = k < T ? result.measurements[k][0] : nan;
    const double TR_meas = k < T ? result.measurements[k][1] : nan;
    const bool feasible = k == 0 ? true : result.per_step_feasible[k - 1];
    out << k << ',' << fmt(static_cast<double>(k) * dt) << ',' << fmt(F) << ','
        << fmt(state.cB) << ',' << fmt(state.TR) << ',' << fmt(cB_meas) << ','
        << fmt(TR_meas) << ',' << (feasible ? 1 : 0) << "\n";
  }
}

/// Full-state replicate dump used by --dump-trajectories.
void write_state_csv(const fs::path& path, const harness::ClosedLoopResult& result,
                     double dt) {
  auto out = open_out(path);
  out << "t,cA,cB,TR,TK,F,cB_meas,TR_meas\n";
  const std::size_t T = result.inputs.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k <= T; ++k) {
    const auto& state = result.states[k];
    const double F = k < T ? result.inputs[k] : nan;
    const double cB_meas = k < T ? result.measurements[k][0] : nan;
    const double TR_meas = k < T ? result.measurements[k][1] : nan;
    out << fmt(static_cast<double>(k) * dt) << ',' << fmt(state.cA) << ','
        << fmt(state.cB) << ',' << fmt(state.TR) << ',' << fmt(state.TK) << ','
        << fmt(F) << ',' << fmt(cB_meas) << ',' << fmt(TR_meas) << "\n";
  }
}

ordered_json record_to_json(const bo::IterationRecord& record, bool log_wall_time) {
  ordered_json j;
  j["iteration"] = record.iteration;
  std::vector<double> theta(record.theta.data(), record.theta.data() + record.theta.size());
  j["theta"] = theta;
  j["failed"] = record.failed;
  j["y_obj"] = record.y_obj;
  j["y_con"] = record.y_con;
  if (record.eta.has_value()) j["eta"] = *record.eta; else j["eta"] = nullptr;
  if (record.acq_value.has_value()) j["acq_value"] = *record.acq_value;
  else j["acq_value"] = nullptr;
  j["mode"] = record.mode;
  if (std::isfinite(record.best_feasible)) j["best_feasible"] = record.best_feasible;
  else j["best_feasible"] = nullptr;
  j["wall_time_s"] = log_wall_time ? record.wall_time_s : 0.0;
  char stream_hex[32];
  std::snprintf(stream_hex, sizeof(stream_hex), "%016llx",
                static_cast<unsigned long long>(record.stream_id));
  j["rng_stream_id"] = stream_hex;
  return j;
}

struct SeedRunOutput {
  bool ok = false;
  std::string error;
  std::vector<double> best_production_history;  // -best_feasible per iteration
};

}  // namespace

std::string resolve_out_dir(const config::ExperimentConfig& config,
                            const CommandOptions& options) {
  if (options.out_dir.has_value() && !options.out_dir->empty()) return *options.out_dir;
  if (!config.out_dir.empty()) return config.out_dir;
  if (const char* env = std::getenv("MPCTUNE_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "runs";
}

int cmd_tune(const config::ExperimentConfig& config, const CommandOptions& options) {
  par::set_max_threads(config.threads == 0 ? 1 << 20 : config.threads);
  const fs::path out_dir = resolve_out_dir(config, options);
  fs::create_directories(out_dir);
  const auto seeds = options.seeds.value_or(config.seeds);
  const auto resolved = config.resolved();

  const auto evaluator =
      harness::make_evaluator(config.scenario_config, config.replicates);

  std::vector<SeedRunOutput> outputs(seeds.size());
  par::parallel_for(seeds.size(), [&](std::size_t i) {
    const std::uint64_t seed = seeds[i];
    SeedRunOutput& output = outputs[i];
    try {
      bo::BoRunState state = bo::make_state(config.theta_box, config.bo, seed);
      bo::BoReport report;
      std::string run_error;
      try {
        report = bo::run(state, evaluator);
      } catch (const std::exception& e) {
        run_error = e.what();  // partial log still flushed below
      }

      {
        auto log = open_out(out_dir / ("tune_seed" + std::to_string(seed) + ".jsonl"));
        for (const auto& record : state.records) {
          log << record_to_json(record, config.log_wall_time).dump() << "\n";
        }
      }
      {
        auto csv =
            open_out(out_dir / ("best_so_far_seed" + std::to_string(seed) + ".csv"));
        csv << "iteration,best_feasible_objective,best_feasible_production\n";
        for (std::size_t it = 0; it < state.best_feasible_history.size(); ++it) {
          const double best = state.best_feasible_history[it];
          csv << it << ',' << fmt(best) << ',' << fmt(-best) << "\n";
        }
        for (std::size_t it = 0; it < state.best_feasible_history.size(); ++it) {
          output.best_production_history.push_back(-state.best_feasible_history[it]);
        }
      }
      if (!run_error.empty()) throw std::runtime_error(run_error);

      ordered_json best;
      best["seed"] = seed;
      best["recommendation_source"] = report.recommendation_source;
      if (report.recommended_theta.size() == 15) {
        const auto theta = harness::TuningParams::from_vector(report.recommended_theta);
        best.update(config::theta_to_json(theta));
        std::vector<double> flat(report.recommended_theta.data(),
                                 report.recommended_theta.data() + 15);
        best["theta"] = flat;
      }
      if (std::isfinite(report.best_feasible)) {
        best["best_feasible_objective"] = report.best_feasible;
        best["best_feasible_production"] = -report.best_feasible;
      } else {
        best["best_feasible_objective"] = nullptr;
        best["best_feasible_production"] = nullptr;
      }
      best["no_bo_iterations"] = report.pure_random_search;
      best["config"] = resolved;
      write_json(out_dir / ("best_theta_seed" + std::to_string(seed) + ".json"), best);
      output.ok = true;
    } catch (const std::exception& e) {
      output.error = e.what();
    }
  });

  // Cross-seed aggregation of the best-so-far curves (over seeds with a
  // feasible value at that iteration).
  {
    auto csv = open_out(out_dir / "tune_summary.csv");
    csv << "iteration,n_feasible,mean_production,std_production,min_production,"
           "max_production\n";
    std::size_t iterations = 0;
    for (const auto& output : outputs) {
      iterations = std::max(iterations, output.best_production_history.size());
    }
    for (std::size_t it = 0; it < iterations; ++it) {
      std::vector<double> values;
      for (const auto& output : outputs) {
        if (it < output.best_production_history.size() &&
            std::isfinite(output.best_production_history[it])) {
          values.push_back(output.best_production_history[it]);
        }
      }
      if (values.empty()) {
        csv << it << ",0,nan,nan,nan,nan\n";
        continue;
      }
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      const double stddev =
          values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
      csv << it << ',' << values.size() << ',' << fmt(mean) << ',' << fmt(stddev) << ','
          << fmt(*std::min_element(values.begin(), values.end())) << ','
          << fmt(*std::max_element(values.begin(), values.end())) << "\n";
    }
  }

  int exit_code = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (!outputs[i].ok) {
      std::cerr << "tune: seed " << seeds[i] << " failed: " << outputs[i].error << "\n";
      exit_code = 1;
    }
  }
  return exit_code;
}

int cmd_baseline(const config::ExperimentConfig& config, const CommandOptions& options) {
  par::set_max_threads(config.threads == 0 ? 1 << 20 : config.threads);
  const fs::path out_dir = resolve_out_dir(config, options);
  fs::create_directories(out_dir);
  const std::uint64_t seed = options.seeds.has_value() && !options.seeds->empty()
                                 ? options.seeds->front()
                                 : config.seeds.front();

  const auto baseline = harness::baseline_openloop_id(config.scenario_config, seed,
                                                      config.prbs_points,
                                                      config.prbs_hold_steps);

  ordered_json j;
  j["seed"] = seed;
  harness::TuningParams theta;
  theta.narx = baseline.coeffs;
  theta.backoff = 0.0;
  j.update(config::theta_to_json(theta));
  j["train_accuracy"] = baseline.train_accuracy;
  j["holdout_accuracy"] = baseline.holdout_accuracy;
  j["holdout_accuracy_per_output"] = {baseline.holdout_accuracy_per_output[0],
                                      baseline.holdout_accuracy_per_output[1]};
  j["ridge_fallback"] = baseline.ridge_fallback;
  j["closed_loop_production"] = baseline.closed_loop.production;
  j["config"] = config.resolved();
  write_json(out_dir / "baseline_theta.json", j);
  write_trajectory_csv(out_dir / "baseline_trajectory.csv", baseline.closed_loop,
                       config.scenario_config.dt);
  return 0;
}

int cmd_assess(const config::ExperimentConfig& config, const CommandOptions& options) {
  par::set_max_threads(config.threads == 0 ? 1 << 20 : config.threads);
  if (!options.theta_path.has_value()) {
    std::cerr << "assess: --theta <file> is required\n";
    return 2;
  }
  const fs::path out_dir = resolve_out_dir(config, options);
  fs::create_directories(out_dir);
  const auto theta = config::load_theta(*options.theta_path);
  const std::uint64_t seed = options.seeds.has_value() && !options.seeds->empty()
                                 ? options.seeds->front()
                                 : config.seeds.front();

  std::vector<harness::ClosedLoopResult> trajectories;
  const auto report = harness::monte_carlo_assess(
      theta, config.scenario_config, config.assess_runs, seed,
      options.dump_trajectories ? &trajectories : nullptr);

  ordered_json j;
  j["seed"] = seed;
  j["runs"] = report.runs;
  j["theta"] = config::theta_to_json(theta);
  j["production_stats"] = ordered_json{{"mean", report.production_mean},
                                       {"std", report.production_std},
                                       {"min", report.production_min},
                                       {"max", report.production_max}};
  j["per_step_violation_freq"] = report.per_step_violation_freq;
  j["max_violation_freq"] = report.max_violation_freq;
  j["config"] = config.resolved();
  write_json(out_dir / "assessment.json", j);

  if (options.dump_trajectories) {
    for (std::size_t r = 0; r < trajectories.size(); ++r) {
      write_state_csv(out_dir / ("assess_traj_" + std::to_string(r) + ".csv"),
                      trajectories[r], config.scenario_config.dt);
    }
  }
  return 0;
}

int cmd_simulate(const config::ExperimentConfig& config, const CommandOptions& options) {
  if (!options.theta_path.has_value()) {
    std::cerr << "simulate: --theta <file> is required\n";
    return 2;
  }
  const fs::path out_dir = resolve_out_dir(config, options);
  fs::create_directories(out_dir);
  const auto theta = config::load_theta(*options.theta_path);
  const std::uint64_t seed = options.seeds.has_value() && !options.seeds->empty()
                                 ? options.seeds->front()
                                 : config.seeds.front();

  rng::Stream stream(rng::derive_key({seed, 0x73696dULL}));
  const auto result = harness::run_closed_loop(theta, config.scenario_config, stream);
  write_trajectory_csv(out_dir / "trajectory.csv", result, config.scenario_config.dt);

  ordered_json j;
  j["seed"] = seed;
  j["production"] = result.production;
  j["all_steps_feasible"] =
      std::all_of(result.per_step_feasible.begin(), result.per_step_feasible.end(),
                  [](bool feasible) { return feasible; });
  j["solver_degenerate"] = result.solver_degenerate;
  j["theta"] = config::theta_to_json(theta);
  j["config"] = config.resolved();
  write_json(out_dir / "simulation.json", j);
  return 0;
}

}  // namespace mpctune::runner
