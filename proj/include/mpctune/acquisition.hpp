#pragma once

#include "mpctune/gp.hpp"
#include "mpctune/math.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace mpctune::acq {

/// Sigma below this is treated as a deterministic prediction.
inline constexpr double kSigmaFloor = 1e-12;

enum class Mode { kEic, kFeasibilityOnly };

struct AcquisitionConfig {
  double beta = 0.05;   // feasibility confidence level for the incumbent
  int restarts = 32;    // low-discrepancy multistart count
  int local_iters = 200;  // objective evaluations per local refinement

  AcquisitionConfig() = default;
  AcquisitionConfig(double beta_, int restarts_, int local_iters_);
};

struct Incumbent {
  double value = 0.0;              // eta, +inf when no feasible point found
  Eigen::VectorXd location;        // empty when feasible_found is false
  bool feasible_found = false;
};

/// Expected improvement under the minimization convention, from posterior
/// moments. sd below kSigmaFloor collapses to max(0, eta - mean).
double expected_improvement(double mean, double sd, double eta);
double expected_improvement(const gp::GpModel& objective_gp,
                            const Eigen::VectorXd& query, double eta);

/// Probability that the constraint value is non-negative under the GP
/// posterior. sd below kSigmaFloor collapses to the 0/1 indicator.
double probability_feasible(double mean, double sd);
double probability_feasible(const gp::GpModel& constraint_gp,
                            const Eigen::VectorXd& query);

/// Expected improvement with constraints: EI weighted by the feasibility
/// probability. Exactly zero whenever either factor is zero.
double eic(const gp::GpModel& objective_gp, const gp::GpModel& constraint_gp,
           const Eigen::VectorXd& query, double eta);

/// Minimizes the posterior mean subject to the probabilistic feasibility test
/// Phi(mu_c/sd_c) >= 1 - beta via multistart local search over the box.
/// extra_starts (e.g. the best observed point) join the seeded design.
Incumbent compute_incumbent(const gp::GpModel& objective_gp,
                            const gp::GpModel& constraint_gp,
                            const AcquisitionConfig& config, const math::Box& box,
                            std::uint64_t seed,
                            const std::vector<Eigen::VectorXd>& extra_starts = {});

struct AcquisitionResult {
  Eigen::VectorXd point;
  double value = 0.0;
  Mode mode_used = Mode::kEic;
  bool flat_landscape = false;  // fell back to the max-variance start
};

/// Maximizes EIC (or the feasibility probability when mode is
/// kFeasibilityOnly or no feasible incumbent exists) by multistart local
/// ascent. Pass constraint_gp = nullptr for plain EI. When every start ends
/// at zero acquisition, returns the start with the largest posterior
/// variance. Deterministic given seed.
AcquisitionResult maximize_acquisition(
    const gp::GpModel& objective_gp, const gp::GpModel* constraint_gp,
    const Incumbent& incumbent, const AcquisitionConfig& config,
    const math::Box& box, std::uint64_t seed, Mode mode = Mode::kEic,
    const std::vector<Eigen::VectorXd>& extra_starts = {});

}  // namespace mpctune::acq
