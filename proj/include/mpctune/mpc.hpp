#pragma once

#include "mpctune/narx.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace mpctune::mpc {

struct SolverConfig {
  int restarts = 8;     // 4 canonical starts + low-discrepancy extras
  int max_iters = 500;  // objective evaluations per start
  double tolerance = 1e-10;
};

struct MpcConfig {
  int Np = 10;
  double F_min = 5.0;    // 1/h
  double F_max = 35.0;   // 1/h
  double T_min = 100.0;  // degC
  double T_max = 150.0;  // degC
  double backoff = 0.0;  // scaled output units, tightens the upper T bound
  double dt = 0.005;     // h
  double Vin = 10.01;    // L
  double penalty_weight = 1e3;
  SolverConfig solver;
  narx::ScalingSpec scaling;

  void validate() const;
};

enum class SolverStatus { kOk, kDegenerate };

struct MpcSolution {
  std::vector<double> u_sequence;               // physical inputs, length Np
  std::vector<Eigen::Vector2d> predicted_outputs;  // scaled, length Np
  double objective_value = 0.0;
  SolverStatus status = SolverStatus::kOk;
};

/// Receding-horizon objective (to minimize): negative predicted production
/// plus a quadratic penalty on backoff-tightened temperature bound
/// violations. The upper bound is tightened by `backoff`; the lower bound
/// carries no backoff.
double mpc_objective(const std::vector<double>& u_sequence,
                     const Eigen::Vector2d& y_current_scaled,
                     const narx::NarxCoeffs& coeffs, const MpcConfig& config);

/// Minimizes mpc_objective over [F_min, F_max]^Np by multistart bounded
/// Nelder-Mead. Starts: the warm start (when given), constant F_min,
/// constant F_max, constant midpoint, plus seeded low-discrepancy points up
/// to config.solver.restarts. Deterministic.
MpcSolution solve(const Eigen::Vector2d& y_current_scaled, const narx::NarxCoeffs& coeffs,
                  const MpcConfig& config,
                  const std::optional<std::vector<double>>& warm_start = std::nullopt);

/// Stateful receding-horizon controller: returns the first input of the
/// optimized sequence, keeping the one-step-shifted solution as the next
/// warm start.
class Controller {
 public:
  Controller(narx::NarxCoeffs coeffs, MpcConfig config);

  /// y_current_meas: measured (cB, TR) in physical units.
  double control(const Eigen::Vector2d& y_current_meas);

  SolverStatus last_status() const { return last_status_; }

 private:
  narx::NarxCoeffs coeffs_;
  MpcConfig config_;
  std::optional<std::vector<double>> warm_start_;
  SolverStatus last_status_ = SolverStatus::kOk;
};

}  // namespace mpctune::mpc
