#pragma once

#include "mpctune/bo.hpp"
#include "mpctune/cstr.hpp"
#include "mpctune/math.hpp"
#include "mpctune/mpc.hpp"
#include "mpctune/narx.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace mpctune::harness {

/// The 15-dimensional decision vector: 14 NARX coefficients plus the
/// constraint backoff, with the standard tuning box.
struct TuningParams {
  narx::NarxCoeffs narx;
  double backoff = 0.0;

  Eigen::VectorXd to_vector() const;  // 14 coefficients then backoff
  static TuningParams from_vector(const Eigen::VectorXd& theta);
};

/// Tuning box: coefficients in [-2, 2], backoff in [0, 0.2].
math::Box tuning_box();

/// Everything a closed-loop experiment needs besides theta.
struct ScenarioConfig {
  plant::PlantParams plant;
  plant::NoiseSpec noise;
  int horizon_steps = 40;   // T
  double dt = 0.005;        // h
  int substeps = 10;        // RK4 sub-intervals per sampling interval
  double epsilon = 0.05;    // per-step allowed violation probability
  mpc::MpcConfig mpc;

  void validate() const;
};

struct ClosedLoopResult {
  // True state trajectory, index 0..T.
  std::vector<plant::PlantState> states;
  // Measurements fed to the controller, index 0..T-1.
  std::vector<Eigen::Vector2d> measurements;
  std::vector<double> inputs;         // applied F_k, index 0..T-1
  std::vector<bool> per_step_feasible;  // T entries, checks y_1..y_T
  double production = 0.0;            // moles of B
  bool solver_degenerate = false;     // any MPC solve ended degenerate
};

struct Evaluation {
  double y_obj = 0.0;  // sample average of -production
  double y_con = 0.0;  // min_k (empirical feasibility frequency) - 1 + epsilon
  int replicates = 0;
};

/// Simulates one closed-loop replicate of the MPC defined by theta against
/// the true plant. Feasibility is recorded on the true reactor temperature.
ClosedLoopResult run_closed_loop(const TuningParams& theta, const ScenarioConfig& scenario,
                                 rng::Stream& stream);

/// Pure aggregation of replicate results into the sample-average objective
/// and the per-step chance-constraint estimate.
Evaluation aggregate_evaluation(const std::vector<ClosedLoopResult>& replicates,
                                double epsilon);

/// Runs M i.i.d. replicates on sub-streams of stream_key (replicates may run
/// on multiple threads; aggregation is order-independent).
Evaluation evaluate(const TuningParams& theta, int replicate_count,
                    const ScenarioConfig& scenario, std::uint64_t stream_key);

/// Adapter for the BO driver.
bo::Evaluator make_evaluator(const ScenarioConfig& scenario, int replicate_count);

/// Open-loop excitation data: the input switches between F_min and F_max
/// (drawn independently per hold) every `hold_steps` plant steps while the
/// plant runs continuously from the benchmark initial state. Rows hold
/// scaled (y_k, u_k, y_{k+1}) with measured outputs.
std::vector<narx::IoRow> generate_prbs_dataset(const ScenarioConfig& scenario,
                                               int n_points, int hold_steps,
                                               rng::Stream& stream);

struct BaselineResult {
  narx::NarxCoeffs coeffs;
  double train_accuracy = 0.0;    // mean 1 - NRMSE over the two outputs
  double holdout_accuracy = 0.0;
  Eigen::Vector2d holdout_accuracy_per_output = Eigen::Vector2d::Zero();
  bool ridge_fallback = false;
  ClosedLoopResult closed_loop;   // run with the fitted model, zero backoff
};

/// The traditional identification baseline: PRBS excitation, least-squares
/// NARX fit on an 80/20 train/holdout split, then one closed-loop run with
/// the fitted coefficients and zero backoff.
BaselineResult baseline_openloop_id(const ScenarioConfig& scenario, std::uint64_t seed,
                                    int n_points = 3000, int hold_steps = 100);

struct AssessmentReport {
  int runs = 0;
  std::vector<double> per_step_violation_freq;  // T entries
  double production_mean = 0.0;
  double production_std = 0.0;
  double production_min = 0.0;
  double production_max = 0.0;
  double max_violation_freq = 0.0;
  std::vector<double> productions;  // per replicate
};

/// Monte-Carlo assessment of a fixed theta over n_runs independent
/// replicates (parallel-safe, order-independent aggregation).
AssessmentReport monte_carlo_assess(const TuningParams& theta,
                                    const ScenarioConfig& scenario, int n_runs,
                                    std::uint64_t seed,
                                    std::vector<ClosedLoopResult>* trajectories = nullptr);

}  // namespace mpctune::harness
