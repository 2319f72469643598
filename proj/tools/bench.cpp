// Compares the serial reference path against the OpenMP path on the two
// replicate-parallel workloads (Monte-Carlo assessment and acquisition
// maximization) and checks that both produce identical results.

#include "mpctune/acquisition.hpp"
#include "mpctune/gp.hpp"
#include "mpctune/harness.hpp"
#include "mpctune/parallel.hpp"
#include "mpctune/rng.hpp"

#include <chrono>
#include <cstdio>
#include <string>

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

mpctune::harness::ScenarioConfig benchmark_scenario() {
  mpctune::harness::ScenarioConfig scenario;
  scenario.plant.cA0 = 5.1;
  scenario.noise = mpctune::plant::NoiseSpec(0.2, 10.0);
  return scenario;
}

mpctune::harness::TuningParams benchmark_theta() {
  mpctune::rng::Stream stream(42);
  Eigen::VectorXd theta(15);
  for (int i = 0; i < 14; ++i) theta[i] = stream.uniform(-0.5, 0.5);
  theta[14] = 0.05;
  return mpctune::harness::TuningParams::from_vector(theta);
}

}  // namespace

int main(int argc, char** argv) {
  int assess_runs = 32;
  int acq_repeats = 20;
  if (argc > 1) assess_runs = std::stoi(argv[1]);
  if (argc > 2) acq_repeats = std::stoi(argv[2]);

  std::printf("openmp compiled in: %s\n",
              mpctune::par::openmp_enabled() ? "yes" : "no");

  const auto scenario = benchmark_scenario();
  const auto theta = benchmark_theta();

  mpctune::par::set_max_threads(1);
  auto t0 = Clock::now();
  const auto serial_report =
      mpctune::harness::monte_carlo_assess(theta, scenario, assess_runs, 7);
  const double serial_assess = seconds_since(t0);

  mpctune::par::set_max_threads(1 << 20);
  const int threads = mpctune::par::max_threads();
  t0 = Clock::now();
  const auto parallel_report =
      mpctune::harness::monte_carlo_assess(theta, scenario, assess_runs, 7);
  const double parallel_assess = seconds_since(t0);

  const bool assess_match =
      serial_report.production_mean == parallel_report.production_mean &&
      serial_report.per_step_violation_freq == parallel_report.per_step_violation_freq;

  std::printf("monte_carlo_assess (%d runs):\n", assess_runs);
  std::printf("  serial   %8.3f s\n", serial_assess);
  std::printf("  %2d-thread %7.3f s  speedup %.2fx  results %s\n", threads,
              parallel_assess, serial_assess / parallel_assess,
              assess_match ? "identical" : "DIFFER");

  // Acquisition maximization over a moderate GP.
  mpctune::rng::Stream data_stream(11);
  const int n = 40;
  const int d = 15;
  Eigen::MatrixXd inputs(n, d);
  Eigen::VectorXd y_obj(n);
  Eigen::VectorXd y_con(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) inputs(i, j) = data_stream.uniform();
    y_obj[i] = inputs.row(i).squaredNorm() + 0.1 * data_stream.normal();
    y_con[i] = 0.5 - inputs(i, 0) + 0.05 * data_stream.normal();
  }
  const auto obj = mpctune::gp::fit_hyperparameters(inputs, y_obj, {}, 3);
  const auto con = mpctune::gp::fit_hyperparameters(inputs, y_con, {}, 4);
  const auto box = mpctune::math::Box::unit(d);
  const mpctune::acq::AcquisitionConfig acq_config;

  mpctune::par::set_max_threads(1);
  t0 = Clock::now();
  Eigen::VectorXd serial_point;
  for (int r = 0; r < acq_repeats; ++r) {
    const auto inc = mpctune::acq::compute_incumbent(obj.model, con.model, acq_config,
                                                     box, static_cast<std::uint64_t>(r));
    serial_point = mpctune::acq::maximize_acquisition(obj.model, &con.model, inc,
                                                      acq_config, box,
                                                      static_cast<std::uint64_t>(r))
                       .point;
  }
  const double serial_acq = seconds_since(t0);

  mpctune::par::set_max_threads(1 << 20);
  t0 = Clock::now();
  Eigen::VectorXd parallel_point;
  for (int r = 0; r < acq_repeats; ++r) {
    const auto inc = mpctune::acq::compute_incumbent(obj.model, con.model, acq_config,
                                                     box, static_cast<std::uint64_t>(r));
    parallel_point = mpctune::acq::maximize_acquisition(obj.model, &con.model, inc,
                                                        acq_config, box,
                                                        static_cast<std::uint64_t>(r))
                         .point;
  }
  const double parallel_acq = seconds_since(t0);

  std::printf("acquisition maximization (%d repeats, n=%d, d=%d):\n", acq_repeats, n, d);
  std::printf("  serial   %8.3f s\n", serial_acq);
  std::printf("  %2d-thread %7.3f s  speedup %.2fx  results %s\n", threads, parallel_acq,
              serial_acq / parallel_acq,
              serial_point == parallel_point ? "identical" : "DIFFER");

  return assess_match && serial_point == parallel_point ? 0 : 1;
}
