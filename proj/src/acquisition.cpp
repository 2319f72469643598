#include "mpctune/acquisition.hpp"

#include "mpctune/nelder_mead.hpp"
#include "mpctune/parallel.hpp"
#include "mpctune/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mpctune::acq {

AcquisitionConfig::AcquisitionConfig(double beta_, int restarts_, int local_iters_)
    : beta(beta_), restarts(restarts_), local_iters(local_iters_) {
  if (!(beta > 0.0 && beta <= 0.5)) {
    throw std::invalid_argument("AcquisitionConfig: beta outside (0, 0.5]");
  }
  if (restarts < 1 || local_iters < 1) {
    throw std::invalid_argument("AcquisitionConfig: counts must be positive");
  }
}

double expected_improvement(double mean, double sd, double eta) {
  if (sd < kSigmaFloor) {
    return std::max(0.0, eta - mean);
  }
  const double z = (eta - mean) / sd;
  const double ei = sd * (z * math::normal_cdf(z) + math::normal_pdf(z));
  return std::max(0.0, ei);
}

double expected_improvement(const gp::GpModel& objective_gp,
                            const Eigen::VectorXd& query, double eta) {
  const auto moments = objective_gp.posterior(query);
  return expected_improvement(moments.mean, std::sqrt(moments.variance), eta);
}

double probability_feasible(double mean, double sd) {
  if (sd < kSigmaFloor) {
    return mean >= 0.0 ? 1.0 : 0.0;
  }
  return math::normal_cdf(mean / sd);
}

double probability_feasible(const gp::GpModel& constraint_gp,
                            const Eigen::VectorXd& query) {
  const auto moments = constraint_gp.posterior(query);
  return probability_feasible(moments.mean, std::sqrt(moments.variance));
}

double eic(const gp::GpModel& objective_gp, const gp::GpModel& constraint_gp,
           const Eigen::VectorXd& query, double eta) {
  const double p = probability_feasible(constraint_gp, query);
  if (p == 0.0) return 0.0;
  const double ei = expected_improvement(objective_gp, query, eta);
  if (ei == 0.0) return 0.0;
  return ei * p;
}

namespace {

std::vector<Eigen::VectorXd> multistart_points(
    const math::Box& box, int restarts, std::uint64_t seed,
    const std::vector<Eigen::VectorXd>& extra_starts) {
  std::vector<Eigen::VectorXd> starts;
  starts.reserve(static_cast<std::size_t>(restarts) + extra_starts.size());
  rng::Stream shift_stream(rng::derive_key({seed, 0x616371ULL}));
  Eigen::VectorXd shift(box.dim());
  for (int i = 0; i < box.dim(); ++i) shift[i] = shift_stream.uniform();
  math::LowDiscrepancySequence sequence(box.dim(), shift);
  for (int r = 0; r < restarts; ++r) {
    starts.push_back(box.from_unit(sequence.next()));
  }
  for (const auto& p : extra_starts) {
    starts.push_back(box.clamp(p));
  }
  return starts;
}

}  // namespace

Incumbent compute_incumbent(const gp::GpModel& objective_gp,
                            const gp::GpModel& constraint_gp,
                            const AcquisitionConfig& config, const math::Box& box,
                            std::uint64_t seed,
                            const std::vector<Eigen::VectorXd>& extra_starts) {
  const double required = 1.0 - config.beta;

  // Scale the infeasibility penalty off the observed objective spread so the
  // penalized landscape is dominated by feasibility violations.
  const double spread =
      objective_gp.targets().maxCoeff() - objective_gp.targets().minCoeff();
  const double penalty = 1e6 * std::max(spread, 1.0);
  auto penalized_mean = [&](const Eigen::VectorXd& x) {
    const double gap = std::max(0.0, required - probability_feasible(constraint_gp, x));
    return objective_gp.posterior(x).mean + penalty * gap * gap;
  };

  const auto starts = multistart_points(box, config.restarts, seed, extra_starts);
  std::vector<Eigen::VectorXd> finals(starts.size());
  opt::NelderMeadOptions nm;
  nm.max_evals = config.local_iters;
  par::parallel_for(starts.size(), [&](std::size_t r) {
    finals[r] = opt::nelder_mead(penalized_mean, starts[r], box, nm).x;
  });

  Incumbent incumbent;
  incumbent.value = std::numeric_limits<double>::infinity();
  for (const auto& x : finals) {
    if (probability_feasible(constraint_gp, x) < required) continue;
    const double mean = objective_gp.posterior(x).mean;
    if (mean < incumbent.value) {
      incumbent.value = mean;
      incumbent.location = x;
      incumbent.feasible_found = true;
    }
  }
  return incumbent;
}

AcquisitionResult maximize_acquisition(
    const gp::GpModel& objective_gp, const gp::GpModel* constraint_gp,
    const Incumbent& incumbent, const AcquisitionConfig& config,
    const math::Box& box, std::uint64_t seed, Mode mode,
    const std::vector<Eigen::VectorXd>& extra_starts) {
  const bool feasibility_only =
      mode == Mode::kFeasibilityOnly ||
      (constraint_gp != nullptr && !incumbent.feasible_found);
  if (feasibility_only && constraint_gp == nullptr) {
    throw std::invalid_argument(
        "maximize_acquisition: feasibility mode needs a constraint model");
  }

  auto acquisition = [&](const Eigen::VectorXd& x) -> double {
    if (feasibility_only) {
      return probability_feasible(*constraint_gp, x);
    }
    if (constraint_gp == nullptr) {
      return expected_improvement(objective_gp, x, incumbent.value);
    }
    return eic(objective_gp, *constraint_gp, x, incumbent.value);
  };
  auto negated = [&](const Eigen::VectorXd& x) { return -acquisition(x); };

  const auto starts = multistart_points(box, config.restarts, seed, extra_starts);
  std::vector<Eigen::VectorXd> finals(starts.size());
  std::vector<double> values(starts.size());
  opt::NelderMeadOptions nm;
  nm.max_evals = config.local_iters;
  par::parallel_for(starts.size(), [&](std::size_t r) {
    const auto result = opt::nelder_mead(negated, starts[r], box, nm);
    finals[r] = result.x;
    values[r] = -result.value;
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < values.size(); ++r) {
    if (values[r] > values[best]) best = r;
  }

  AcquisitionResult result;
  result.mode_used = feasibility_only ? Mode::kFeasibilityOnly : mode;
  if (values[best] > 0.0) {
    result.point = finals[best];
    result.value = values[best];
    return result;
  }

  // All-zero acquisition: fall back to the start with maximal posterior
  // variance, ties to the lowest index, so the step still explores.
  std::size_t most_uncertain = 0;
  double best_variance = -1.0;
  for (std::size_t r = 0; r < starts.size(); ++r) {
    const double variance = objective_gp.posterior(starts[r]).variance;
    if (variance > best_variance) {
      best_variance = variance;
      most_uncertain = r;
    }
  }
  result.point = starts[most_uncertain];
  result.value = 0.0;
  result.flat_landscape = true;
  return result;
}

}  // namespace mpctune::acq
