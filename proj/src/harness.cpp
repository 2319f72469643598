#include "mpctune/harness.hpp"

#include "mpctune/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mpctune::harness {

Eigen::VectorXd TuningParams::to_vector() const {
  Eigen::VectorXd theta(15);
  theta.head<14>() = narx.flatten();
  theta[14] = backoff;
  return theta;
}

TuningParams TuningParams::from_vector(const Eigen::VectorXd& theta) {
  if (theta.size() != 15) {
    throw std::invalid_argument("TuningParams: expected 15 entries");
  }
  TuningParams params;
  params.narx = narx::NarxCoeffs::from_flat(theta.head<14>());
  params.backoff = theta[14];
  return params;
}

math::Box tuning_box() {
  std::vector<std::pair<double, double>> bounds(14, {-2.0, 2.0});
  bounds.emplace_back(0.0, 0.2);
  return math::Box(std::move(bounds));
}

void ScenarioConfig::validate() const {
  plant.validate();
  mpc.validate();
  if (horizon_steps < 1) throw std::invalid_argument("ScenarioConfig: horizon_steps >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("ScenarioConfig: dt > 0");
  if (substeps < 1) throw std::invalid_argument("ScenarioConfig: substeps >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("ScenarioConfig: epsilon in (0,1)");
  }
}

ClosedLoopResult run_closed_loop(const TuningParams& theta, const ScenarioConfig& scenario,
                                 rng::Stream& stream) {
  scenario.validate();
  mpc::MpcConfig controller_config = scenario.mpc;
  controller_config.backoff = theta.backoff;
  controller_config.dt = scenario.dt;
  mpc::Controller controller(theta.narx, controller_config);

  ClosedLoopResult result;
  const int T = scenario.horizon_steps;
  result.states.reserve(static_cast<std::size_t>(T) + 1);
  result.measurements.reserve(static_cast<std::size_t>(T));
  result.inputs.reserve(static_cast<std::size_t>(T));
  result.per_step_feasible.reserve(static_cast<std::size_t>(T));

  plant::PlantState state = plant::initial_state();
  result.states.push_back(state);
  for (int k = 0; k < T; ++k) {
    const auto [cB_meas, TR_meas] = plant::measure(state, scenario.noise, stream);
    result.measurements.emplace_back(cB_meas, TR_meas);
    const double F = controller.control(Eigen::Vector2d(cB_meas, TR_meas));
    if (controller.last_status() == mpc::SolverStatus::kDegenerate) {
      result.solver_degenerate = true;
    }
    result.inputs.push_back(F);
    result.production += scenario.mpc.Vin * state.cB * F * scenario.dt;
    state = plant::step(state, F, scenario.dt, scenario.substeps, scenario.plant);
    result.states.push_back(state);
    result.per_step_feasible.push_back(state.TR >= scenario.mpc.T_min &&
                                       state.TR <= scenario.mpc.T_max);
  }
  return result;
}

Evaluation aggregate_evaluation(const std::vector<ClosedLoopResult>& replicates,
                                double epsilon) {
  if (replicates.empty()) {
    throw std::invalid_argument("aggregate_evaluation: no replicates");
  }
  const std::size_t T = replicates.front().per_step_feasible.size();
  Evaluation evaluation;
  evaluation.replicates = static_cast<int>(replicates.size());

  double objective_sum = 0.0;
  double min_frequency = 1.0;
  for (std::size_t k = 0; k < T; ++k) {
    int feasible = 0;
    for (const auto& replicate : replicates) {
      feasible += replicate.per_step_feasible[k] ? 1 : 0;
    }
    min_frequency = std::min(
        min_frequency, static_cast<double>(feasible) / static_cast<double>(replicates.size()));
  }
  for (const auto& replicate : replicates) objective_sum += -replicate.production;

  evaluation.y_obj = objective_sum / static_cast<double>(replicates.size());
  evaluation.y_con = min_frequency - 1.0 + epsilon;
  return evaluation;
}

Evaluation evaluate(const TuningParams& theta, int replicate_count,
                    const ScenarioConfig& scenario, std::uint64_t stream_key) {
  if (replicate_count < 1) {
    throw std::invalid_argument("evaluate: replicate_count must be >= 1");
  }
  std::vector<ClosedLoopResult> replicates(static_cast<std::size_t>(replicate_count));
  std::vector<bool> failed(static_cast<std::size_t>(replicate_count), false);
  par::parallel_for(static_cast<std::size_t>(replicate_count), [&](std::size_t j) {
    rng::Stream replicate_stream(rng::derive_key({stream_key, static_cast<std::uint64_t>(j)}));
    try {
      replicates[j] = run_closed_loop(theta, scenario, replicate_stream);
    } catch (const NumericalError&) {
      failed[j] = true;
    }
  });

  std::vector<ClosedLoopResult> completed;
  completed.reserve(replicates.size());
  for (std::size_t j = 0; j < replicates.size(); ++j) {
    if (!failed[j]) completed.push_back(std::move(replicates[j]));
  }
  if (completed.empty()) {
    throw NumericalError("evaluate: every replicate failed");
  }
  return aggregate_evaluation(completed, scenario.epsilon);
}

bo::Evaluator make_evaluator(const ScenarioConfig& scenario, int replicate_count) {
  return [scenario, replicate_count](const Eigen::VectorXd& theta,
                                     std::uint64_t stream_key) -> bo::EvalOutcome {
    const TuningParams params = TuningParams::from_vector(theta);
    try {
      const Evaluation evaluation = evaluate(params, replicate_count, scenario, stream_key);
      return bo::EvalOutcome::success(evaluation.y_obj, evaluation.y_con,
                                      evaluation.replicates);
    } catch (const NumericalError&) {
      return bo::EvalOutcome::failure();
    }
  };
}

std::vector<narx::IoRow> generate_prbs_dataset(const ScenarioConfig& scenario,
                                               int n_points, int hold_steps,
                                               rng::Stream& stream) {
  if (n_points < 1 || hold_steps < 1) {
    throw std::invalid_argument("generate_prbs_dataset: counts must be positive");
  }
  const auto& scaling = scenario.mpc.scaling;
  std::vector<narx::IoRow> rows;
  rows.reserve(static_cast<std::size_t>(n_points));

  plant::PlantState state = plant::initial_state();
  auto measure_scaled = [&](const plant::PlantState& s) {
    const auto [cB, TR] = plant::measure(s, scenario.noise, stream);
    return Eigen::Vector2d(scaling.cB.scale(cB), scaling.TR.scale(TR));
  };

  double level = 0.0;
  Eigen::Vector2d y = measure_scaled(state);
  for (int k = 0; k < n_points; ++k) {
    if (k % hold_steps == 0) {
      level = stream.uniform() < 0.5 ? scenario.mpc.F_min : scenario.mpc.F_max;
    }
    state = plant::step(state, level, scenario.dt, scenario.substeps, scenario.plant);
    const Eigen::Vector2d y_next = measure_scaled(state);
    rows.push_back(narx::IoRow{y, scaling.F.scale(level), y_next});
    y = y_next;
  }
  return rows;
}

BaselineResult baseline_openloop_id(const ScenarioConfig& scenario, std::uint64_t seed,
                                    int n_points, int hold_steps) {
  rng::Stream prbs_stream(rng::derive_key({seed, 0x70726273ULL}));
  const auto dataset = generate_prbs_dataset(scenario, n_points, hold_steps, prbs_stream);

  const std::size_t train_size = dataset.size() * 8 / 10;
  const std::vector<narx::IoRow> train(dataset.begin(),
                                       dataset.begin() + static_cast<long>(train_size));
  const std::vector<narx::IoRow> holdout(dataset.begin() + static_cast<long>(train_size),
                                         dataset.end());

  const auto fit = narx::fit_least_squares(train);
  BaselineResult baseline;
  baseline.coeffs = fit.coeffs;
  baseline.ridge_fallback = fit.ridge_fallback;
  baseline.train_accuracy = narx::one_step_accuracy(fit.coeffs, train).mean();
  baseline.holdout_accuracy_per_output = narx::one_step_accuracy(fit.coeffs, holdout);
  baseline.holdout_accuracy = baseline.holdout_accuracy_per_output.mean();

  TuningParams theta;
  theta.narx = fit.coeffs;
  theta.backoff = 0.0;
  rng::Stream loop_stream(rng::derive_key({seed, 0x626c6f6fULL}));
  baseline.closed_loop = run_closed_loop(theta, scenario, loop_stream);
  return baseline;
}

AssessmentReport monte_carlo_assess(const TuningParams& theta,
                                    const ScenarioConfig& scenario, int n_runs,
                                    std::uint64_t seed,
                                    std::vector<ClosedLoopResult>* trajectories) {
  if (n_runs < 1) throw std::invalid_argument("monte_carlo_assess: n_runs must be >= 1");
  std::vector<ClosedLoopResult> results(static_cast<std::size_t>(n_runs));
  par::parallel_for(static_cast<std::size_t>(n_runs), [&](std::size_t j) {
    rng::Stream stream(rng::derive_key({seed, 0x6d63ULL, static_cast<std::uint64_t>(j)}));
    results[j] = run_closed_loop(theta, scenario, stream);
  });

  AssessmentReport report;
  report.runs = n_runs;
  const std::size_t T = results.front().per_step_feasible.size();
  report.per_step_violation_freq.assign(T, 0.0);
  for (std::size_t k = 0; k < T; ++k) {
    int violations = 0;
    for (const auto& result : results) {
      violations += result.per_step_feasible[k] ? 0 : 1;
    }
    report.per_step_violation_freq[k] =
        static_cast<double>(violations) / static_cast<double>(n_runs);
  }
  report.max_violation_freq =
      *std::max_element(report.per_step_violation_freq.begin(),
                        report.per_step_violation_freq.end());

  report.productions.reserve(results.size());
  double sum = 0.0;
  report.production_min = std::numeric_limits<double>::infinity();
  report.production_max = -std::numeric_limits<double>::infinity();
  for (const auto& result : results) {
    report.productions.push_back(result.production);
    sum += result.production;
    report.production_min = std::min(report.production_min, result.production);
    report.production_max = std::max(report.production_max, result.production);
  }
  report.production_mean = sum / static_cast<double>(n_runs);
  double sq = 0.0;
  for (double p : report.productions) {
    sq += (p - report.production_mean) * (p - report.production_mean);
  }
  report.production_std = n_runs > 1 ? std::sqrt(sq / (n_runs - 1)) : 0.0;

  if (trajectories != nullptr) *trajectories = std::move(results);
  return report;
}

}  // namespace mpctune::harness
