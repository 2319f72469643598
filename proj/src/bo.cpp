#include "mpctune/bo.hpp"

#include "mpctune/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mpctune::bo {

namespace {

constexpr std::uint64_t kEvalTag = 0x6576616cULL;
constexpr std::uint64_t kInitTag = 0x696e6974ULL;
constexpr std::uint64_t kFitObjTag = 0x666f626aULL;
constexpr std::uint64_t kFitConTag = 0x66636f6eULL;
constexpr std::uint64_t kIncumbentTag = 0x696e63ULL;
constexpr std::uint64_t kAcqTag = 0x616371ULL;

double best_feasible_so_far(const std::vector<Observation>& observations) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& record : observations) {
    if (record.y_con >= 0.0) best = std::min(best, record.y_obj);
  }
  return best;
}

/// Best observed point: lowest objective among feasible observations,
/// falling back to the lowest objective overall.
const Observation* best_observed(const std::vector<Observation>& observations) {
  const Observation* best = nullptr;
  for (const auto& record : observations) {
    if (record.y_con < 0.0) continue;
    if (best == nullptr || record.y_obj < best->y_obj) best = &record;
  }
  if (best == nullptr) {
    for (const auto& record : observations) {
      if (best == nullptr || record.y_obj < best->y_obj) best = &record;
    }
  }
  return best;
}

void refit_gps(BoRunState& state) {
  const int n = static_cast<int>(state.observations.size());
  const int d = state.box.dim();
  Eigen::MatrixXd inputs(n, d);
  Eigen::VectorXd y_obj(n);
  Eigen::VectorXd y_con(n);
  for (int i = 0; i < n; ++i) {
    const auto& record = state.observations[static_cast<std::size_t>(i)];
    inputs.row(i) = state.box.to_unit(record.theta).transpose();
    y_obj[i] = record.y_obj;
    y_con[i] = record.y_con;
  }
  auto obj = gp::fit_hyperparameters(
      inputs, y_obj, state.config.gp_fit,
      rng::derive_key({state.seed, kFitObjTag, static_cast<std::uint64_t>(state.iteration)}));
  auto con = gp::fit_hyperparameters(
      inputs, y_con, state.config.gp_fit,
      rng::derive_key({state.seed, kFitConTag, static_cast<std::uint64_t>(state.iteration)}));
  state.objective_gp = std::make_shared<const gp::GpModel>(std::move(obj.model));
  state.constraint_gp = std::make_shared<const gp::GpModel>(std::move(con.model));
}

}  // namespace

void BoConfig::validate() const {
  if (n_init < 1) throw std::invalid_argument("BoConfig: n_init must be >= 1");
  if (budget < n_init) throw std::invalid_argument("BoConfig: budget must be >= n_init");
}

std::vector<Eigen::VectorXd> initial_design(const math::Box& box, int n_init,
                                            std::uint64_t seed) {
  if (n_init < 1) throw std::invalid_argument("initial_design: n_init must be >= 1");
  rng::Stream stream(rng::derive_key({seed, kInitTag}));
  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<std::size_t>(n_init));
  for (int i = 0; i < n_init; ++i) {
    Eigen::VectorXd theta(box.dim());
    for (int j = 0; j < box.dim(); ++j) {
      theta[j] = stream.uniform(box.lo(j), box.hi(j));
    }
    points.push_back(std::move(theta));
  }
  return points;
}

BoRunState make_state(const math::Box& box, const BoConfig& config, std::uint64_t seed) {
  config.validate();
  BoRunState state;
  state.box = box;
  state.config = config;
  state.seed = seed;
  state.initial_points = initial_design(box, config.n_init, seed);
  return state;
}

void bo_step(BoRunState& state, const Evaluator& evaluator) {
  if (state.iteration >= state.config.budget) {
    throw std::logic_error("bo_step: budget exhausted");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t stream_id = rng::derive_key(
      {state.seed, kEvalTag, static_cast<std::uint64_t>(state.iteration)});

  IterationRecord record;
  record.iteration = state.iteration;
  record.stream_id = stream_id;

  if (state.iteration < state.config.n_init) {
    record.theta = state.initial_points[static_cast<std::size_t>(state.iteration)];
    record.mode = "INIT";
  } else if (state.observations.size() < 2) {
    // Every prior evaluation failed; keep sampling randomly until the GPs
    // have enough data.
    record.theta = initial_design(state.box, 1, stream_id).front();
    record.mode = "INIT";
  } else {
    refit_gps(state);
    std::vector<Eigen::VectorXd> extra_starts;
    if (const Observation* best = best_observed(state.observations)) {
      extra_starts.push_back(state.box.to_unit(best->theta));
    }
    const math::Box unit_box = math::Box::unit(state.box.dim());
    const auto incumbent = acq::compute_incumbent(
        *state.objective_gp, *state.constraint_gp, state.config.acquisition, unit_box,
        rng::derive_key({state.seed, kIncumbentTag, static_cast<std::uint64_t>(state.iteration)}),
        extra_starts);
    const auto proposal = acq::maximize_acquisition(
        *state.objective_gp, state.constraint_gp.get(), incumbent,
        state.config.acquisition, unit_box,
        rng::derive_key({state.seed, kAcqTag, static_cast<std::uint64_t>(state.iteration)}),
        acq::Mode::kEic, extra_starts);
    record.theta = state.box.from_unit(proposal.point);
    record.eta = incumbent.value;
    record.acq_value = proposal.value;
    record.mode =
        proposal.mode_used == acq::Mode::kFeasibilityOnly ? "FEASIBILITY_ONLY" : "EIC";
  }

  EvalOutcome outcome;
  try {
    outcome = evaluator(record.theta, stream_id);
  } catch (const std::exception&) {
    outcome = EvalOutcome::failure();
  }

  if (outcome.ok) {
    Observation obs;
    obs.theta = record.theta;
    obs.y_obj = outcome.y_obj;
    obs.y_con = outcome.y_con;
    obs.replicate_count = outcome.replicate_count;
    obs.stream_id = stream_id;
    state.observations.push_back(std::move(obs));
    record.y_obj = outcome.y_obj;
    record.y_con = outcome.y_con;
  } else {
    record.failed = true;
    record.y_obj = std::numeric_limits<double>::quiet_NaN();
    record.y_con = std::numeric_limits<double>::quiet_NaN();
    ++state.failed_evaluations;
  }

  record.best_feasible = best_feasible_so_far(state.observations);
  state.best_feasible_history.push_back(record.best_feasible);
  record.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  state.records.push_back(std::move(record));
  ++state.iteration;
}

BoReport run(BoRunState& state, const Evaluator& evaluator) {
  while (state.iteration < state.config.budget) {
    bo_step(state, evaluator);
  }

  BoReport report;
  report.pure_random_search = state.config.budget == state.config.n_init;
  report.best_feasible = state.best_feasible_history.empty()
                             ? std::numeric_limits<double>::infinity()
                             : state.best_feasible_history.back();

  if (state.observations.size() >= 2) {
    refit_gps(state);
    std::vector<Eigen::VectorXd> extra_starts;
    if (const Observation* best = best_observed(state.observations)) {
      extra_starts.push_back(state.box.to_unit(best->theta));
    }
    const auto incumbent = acq::compute_incumbent(
        *state.objective_gp, *state.constraint_gp, state.config.acquisition,
        math::Box::unit(state.box.dim()),
        rng::derive_key({state.seed, kIncumbentTag, static_cast<std::uint64_t>(state.config.budget)}),
        extra_starts);
    if (incumbent.feasible_found) {
      report.recommended_theta = state.box.from_unit(incumbent.location);
      report.recommendation_source = "incumbent";
      return report;
    }
  }

  const Observation* best = best_observed(state.observations);
  if (best != nullptr) {
    report.recommended_theta = best->theta;
    report.recommendation_source = "best_observed";
  } else {
    report.recommendation_source = "none";
  }
  return report;
}

}  // namespace mpctune::bo
