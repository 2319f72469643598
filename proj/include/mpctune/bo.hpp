#pragma once

#include "mpctune/acquisition.hpp"
#include "mpctune/gp.hpp"
#include "mpctune/math.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mpctune::bo {

/// One evaluated design point. theta is stored in physical units.
struct Observation {
  Eigen::VectorXd theta;
  double y_obj = 0.0;
  double y_con = 0.0;
  int replicate_count = 1;
  std::uint64_t stream_id = 0;
};

struct EvalOutcome {
  bool ok = false;
  double y_obj = 0.0;
  double y_con = 0.0;
  int replicate_count = 1;

  static EvalOutcome success(double y_obj_, double y_con_, int replicates = 1) {
    return EvalOutcome{true, y_obj_, y_con_, replicates};
  }
  static EvalOutcome failure() { return EvalOutcome{}; }
};

/// Black-box evaluator: physical theta plus a dedicated stream key for this
/// evaluation's randomness.
using Evaluator = std::function<EvalOutcome(const Eigen::VectorXd&, std::uint64_t)>;

struct BoConfig {
  int budget = 40;
  int n_init = 5;
  acq::AcquisitionConfig acquisition;
  gp::FitOptions gp_fit;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  Eigen::VectorXd theta;
  bool failed = false;
  double y_obj = 0.0;
  double y_con = 0.0;
  std::optional<double> eta;        // absent on initial-design iterations
  std::optional<double> acq_value;  // absent on initial-design iterations
  std::string mode;                 // "INIT", "EIC", or "FEASIBILITY_ONLY"
  double best_feasible = 0.0;       // +inf until a feasible point is seen
  double wall_time_s = 0.0;
  std::uint64_t stream_id = 0;
};

struct BoRunState {
  math::Box box;
  BoConfig config;
  std::uint64_t seed = 0;
  std::vector<Eigen::VectorXd> initial_points;  // physical units
  std::vector<Observation> observations;
  std::vector<IterationRecord> records;
  std::vector<double> best_feasible_history;
  int iteration = 0;
  int failed_evaluations = 0;
  std::shared_ptr<const gp::GpModel> objective_gp;
  std::shared_ptr<const gp::GpModel> constraint_gp;
};

struct BoReport {
  Eigen::VectorXd recommended_theta;
  std::string recommendation_source;  // "incumbent", "best_observed", "none"
  double best_feasible = 0.0;
  bool pure_random_search = false;  // budget == n_init, no BO iterations ran
};

/// n i.i.d. uniform points over the box; deterministic given seed.
std::vector<Eigen::VectorXd> initial_design(const math::Box& box, int n_init,
                                            std::uint64_t seed);

BoRunState make_state(const math::Box& box, const BoConfig& config, std::uint64_t seed);

/// One propose -> evaluate -> refit step. Initial-design iterations replay
/// the pre-drawn points; later iterations refit both GPs, compute the
/// constrained incumbent, and maximize the acquisition. A failed evaluation
/// still consumes budget and is logged but never enters the GP data.
void bo_step(BoRunState& state, const Evaluator& evaluator);

/// Runs the full budget and recommends the incumbent location (fallback:
/// best observed feasible point, then best observed point).
BoReport run(BoRunState& state, const Evaluator& evaluator);

inline BoReport run(const math::Box& box, const BoConfig& config,
                    const Evaluator& evaluator, std::uint64_t seed,
                    BoRunState* out_state = nullptr) {
  BoRunState state = make_state(box, config, seed);
  BoReport report = run(state, evaluator);
  if (out_state != nullptr) *out_state = std::move(state);
  return report;
}

}  // namespace mpctune::bo
