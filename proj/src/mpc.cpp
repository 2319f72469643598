#include "mpctune/mpc.hpp"

#include "mpctune/math.hpp"
#include "mpctune/nelder_mead.hpp"
#include "mpctune/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpctune::mpc {

void MpcConfig::validate() const {
  if (Np < 1) throw std::invalid_argument("MpcConfig: Np must be >= 1");
  if (!(F_min < F_max)) throw std::invalid_argument("MpcConfig: F_min must be < F_max");
  if (backoff < 0.0) throw std::invalid_argument("MpcConfig: backoff must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("MpcConfig: dt must be > 0");
  if (!(penalty_weight > 0.0)) {
    throw std::invalid_argument("MpcConfig: penalty_weight must be > 0");
  }
}

double mpc_objective(const std::vector<double>& u_sequence,
                     const Eigen::Vector2d& y_current_scaled,
                     const narx::NarxCoeffs& coeffs, const MpcConfig& config) {
  std::vector<double> u_scaled(u_sequence.size());
  for (std::size_t i = 0; i < u_sequence.size(); ++i) {
    u_scaled[i] = config.scaling.F.scale(u_sequence[i]);
  }
  const auto predictions = narx::simulate_horizon(coeffs, y_current_scaled, u_scaled);

  const double T_max_scaled = config.scaling.TR.scale(config.T_max);
  const double T_min_scaled = config.scaling.TR.scale(config.T_min);

  double production = 0.0;
  double penalty = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double cB = config.scaling.cB.unscale(predictions[i][0]);
    production += config.Vin * cB * u_sequence[i] * config.dt;
    const double TR_scaled = predictions[i][1];
    const double upper = std::max(0.0, TR_scaled + config.backoff - T_max_scaled);
    const double lower = std::max(0.0, T_min_scaled - TR_scaled);
    penalty += upper * upper + lower * lower;
  }
  return -production + config.penalty_weight * penalty;
}

MpcSolution solve(const Eigen::Vector2d& y_current_scaled, const narx::NarxCoeffs& coeffs,
                  const MpcConfig& config,
                  const std::optional<std::vector<double>>& warm_start) {
  config.validate();
  const int Np = config.Np;
  const math::Box box(std::vector<std::pair<double, double>>(
      static_cast<std::size_t>(Np), {config.F_min, config.F_max}));

  auto objective = [&](const Eigen::VectorXd& u) {
    std::vector<double> seq(u.data(), u.data() + u.size());
    return mpc_objective(seq, y_current_scaled, coeffs, config);
  };

  std::vector<Eigen::VectorXd> starts;
  if (warm_start.has_value()) {
    if (static_cast<int>(warm_start->size()) != Np) {
      throw std::invalid_argument("solve: warm start length mismatch");
    }
    Eigen::VectorXd w(Np);
    for (int i = 0; i < Np; ++i) w[i] = (*warm_start)[static_cast<std::size_t>(i)];
    starts.push_back(box.clamp(w));
  }
  starts.push_back(Eigen::VectorXd::Constant(Np, config.F_min));
  starts.push_back(Eigen::VectorXd::Constant(Np, config.F_max));
  starts.push_back(Eigen::VectorXd::Constant(Np, 0.5 * (config.F_min + config.F_max)));
  {
    // Fixed-key shift: the solver must be deterministic in its inputs alone.
    rng::Stream shift_stream(rng::derive_key({0x6d7063ULL, static_cast<std::uint64_t>(Np)}));
    Eigen::VectorXd shift(Np);
    for (int i = 0; i < Np; ++i) shift[i] = shift_stream.uniform();
    math::LowDiscrepancySequence sequence(Np, shift);
    while (static_cast<int>(starts.size()) < config.solver.restarts) {
      starts.push_back(box.from_unit(sequence.next()));
    }
  }

  opt::NelderMeadOptions nm;
  nm.max_evals = config.solver.max_iters;
  nm.f_tol = config.solver.tolerance;

  MpcSolution best;
  double best_value = std::numeric_limits<double>::infinity();
  double best_initial_value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_initial;
  bool improved = false;
  for (const auto& start : starts) {
    const double initial_value = objective(start);
    if (initial_value < best_initial_value) {
      best_initial_value = initial_value;
      best_initial = start;
    }
    const auto result = opt::nelder_mead(objective, start, box, nm);
    if (result.value < initial_value) improved = true;
    if (result.value < best_value) {
      best_value = result.value;
      best.u_sequence.assign(result.x.data(), result.x.data() + result.x.size());
    }
  }

  if (!improved && best_initial_value <= best_value) {
    best.u_sequence.assign(best_initial.data(), best_initial.data() + best_initial.size());
    best_value = best_initial_value;
    best.status = SolverStatus::kDegenerate;
  }

  std::vector<double> u_scaled(best.u_sequence.size());
  for (std::size_t i = 0; i < best.u_sequence.size(); ++i) {
    u_scaled[i] = config.scaling.F.scale(best.u_sequence[i]);
  }
  best.predicted_outputs = narx::simulate_horizon(coeffs, y_current_scaled, u_scaled);
  best.objective_value = best_value;
  return best;
}

Controller::Controller(narx::NarxCoeffs coeffs, MpcConfig config)
    : coeffs_(coeffs), config_(std::move(config)) {
  config_.validate();
}

double Controller::control(const Eigen::Vector2d& y_current_meas) {
  const Eigen::Vector2d y_scaled(config_.scaling.cB.scale(y_current_meas[0]),
                                 config_.scaling.TR.scale(y_current_meas[1]));
  const MpcSolution solution = solve(y_scaled, coeffs_, config_, warm_start_);
  last_status_ = solution.status;

  // Shift the optimized sequence one step for the next warm start.
  std::vector<double> shifted(solution.u_sequence.begin() + 1, solution.u_sequence.end());
  shifted.push_back(solution.u_sequence.back());
  warm_start_ = std::move(shifted);

  return solution.u_sequence.front();
}

}  // namespace mpctune::mpc
