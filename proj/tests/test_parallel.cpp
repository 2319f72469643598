#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mpctune/gp.hpp"
#include "mpctune/harness.hpp"
#include "mpctune/parallel.hpp"
#include "mpctune/rng.hpp"

#include <atomic>
#include <numeric>
#include <stdexcept>
#include <vector>

using namespace mpctune;

namespace {

struct ThreadGuard {
  ~ThreadGuard() { par::set_max_threads(1 << 20); }
};

harness::ScenarioConfig small_scenario() {
  harness::ScenarioConfig scenario;
  scenario.plant.cA0 = 5.1;
  scenario.noise = plant::NoiseSpec(0.2, 10.0);
  scenario.horizon_steps = 10;
  scenario.mpc.Np = 4;
  scenario.mpc.solver.max_iters = 120;
  return scenario;
}

}  // namespace

TEST_CASE("parallel_for covers every index exactly once") {
  ThreadGuard guard;
  par::set_max_threads(1 << 20);
  const std::size_t n = 1000;
  std::vector<std::atomic<int>> hits(n);
  par::parallel_for(n, [&](std::size_t i) { hits[i].fetch_add(1); });
  for (std::size_t i = 0; i < n; ++i) CHECK(hits[i].load() == 1);
}

TEST_CASE("exceptions from worker iterations propagate") {
  ThreadGuard guard;
  par::set_max_threads(1 << 20);
  CHECK_THROWS_AS(par::parallel_for(64,
                                    [&](std::size_t i) {
                                      if (i == 13) throw std::runtime_error("boom");
                                    }),
                  std::runtime_error);
}

TEST_CASE("serial and parallel monte carlo assessments are bit-identical") {
  ThreadGuard guard;
  const auto scenario = small_scenario();
  rng::Stream theta_stream(3);
  Eigen::VectorXd theta(15);
  for (int i = 0; i < 14; ++i) theta[i] = theta_stream.uniform(-0.5, 0.5);
  theta[14] = 0.03;
  const auto params = harness::TuningParams::from_vector(theta);

  par::set_max_threads(1);
  const auto serial = harness::monte_carlo_assess(params, scenario, 12, 17);
  par::set_max_threads(1 << 20);
  const auto parallel = harness::monte_carlo_assess(params, scenario, 12, 17);

  CHECK(serial.production_mean == parallel.production_mean);
  CHECK(serial.production_std == parallel.production_std);
  CHECK(serial.production_min == parallel.production_min);
  CHECK(serial.production_max == parallel.production_max);
  CHECK(serial.per_step_violation_freq == parallel.per_step_violation_freq);
  CHECK(serial.productions == parallel.productions);
}

TEST_CASE("serial and parallel GP fits agree exactly") {
  ThreadGuard guard;
  rng::Stream stream(5);
  const int n = 25;
  const int d = 4;
  Eigen::MatrixXd inputs(n, d);
  Eigen::VectorXd targets(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) inputs(i, j) = stream.uniform();
    targets[i] = std::sin(3.0 * inputs(i, 0)) + 0.1 * stream.normal();
  }

  par::set_max_threads(1);
  const auto serial = gp::fit_hyperparameters(inputs, targets, {}, 21);
  par::set_max_threads(1 << 20);
  const auto parallel = gp::fit_hyperparameters(inputs, targets, {}, 21);

  CHECK(serial.report.best_restart == parallel.report.best_restart);
  CHECK(serial.report.best_likelihood == parallel.report.best_likelihood);
  CHECK(serial.model.kernel().lengthscale == parallel.model.kernel().lengthscale);
  CHECK(serial.model.kernel().signal_variance == parallel.model.kernel().signal_variance);
  CHECK(serial.model.kernel().noise_variance == parallel.model.kernel().noise_variance);
}
