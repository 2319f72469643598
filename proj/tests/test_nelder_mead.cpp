#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mpctune/nelder_mead.hpp"

#include <cmath>

using namespace mpctune;

TEST_CASE("quadratic bowl interior minimum") {
  const math::Box box({{-5.0, 5.0}, {-5.0, 5.0}});
  auto f = [](const Eigen::VectorXd& x) {
    return (x[0] - 1.3) * (x[0] - 1.3) + 2.0 * (x[1] + 0.4) * (x[1] + 0.4);
  };
  const auto result = opt::nelder_mead(f, Eigen::Vector2d(4.0, 4.0), box);
  CHECK(result.x[0] == doctest::Approx(1.3).epsilon(1e-4));
  CHECK(result.x[1] == doctest::Approx(-0.4).epsilon(1e-4));
}

TEST_CASE("minimum on the boundary is reachable") {
  const math::Box box({{0.0, 1.0}, {0.0, 1.0}});
  auto f = [](const Eigen::VectorXd& x) { return x[0] + x[1]; };
  const auto result = opt::nelder_mead(f, Eigen::Vector2d(0.9, 0.9), box);
  CHECK(result.x[0] == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(result.x[1] == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("iterates never leave the box") {
  const math::Box box({{-1.0, 2.0}, {0.5, 3.0}, {-2.0, -1.0}});
  int violations = 0;
  auto f = [&](const Eigen::VectorXd& x) {
    if (!box.contains(x, 1e-12)) ++violations;
    return std::sin(5.0 * x[0]) + x[1] * x[1] + std::cos(3.0 * x[2]);
  };
  opt::nelder_mead(f, Eigen::Vector3d(1.9, 2.9, -1.1), box);
  CHECK(violations == 0);
}

TEST_CASE("respects the evaluation budget") {
  const math::Box box({{-1.0, 1.0}});
  int count = 0;
  auto f = [&](const Eigen::VectorXd& x) {
    ++count;
    return x[0] * x[0];
  };
  opt::NelderMeadOptions options;
  options.max_evals = 37;
  const auto result = opt::nelder_mead(f, Eigen::VectorXd::Constant(1, 0.7), box, options);
  CHECK(count <= 37 + 1);  // shrink step may finish the row in flight
  CHECK(result.evals == count);
}

TEST_CASE("deterministic") {
  const math::Box box({{-2.0, 2.0}, {-2.0, 2.0}});
  auto f = [](const Eigen::VectorXd& x) {
    return std::pow(1.0 - x[0], 2) + 100.0 * std::pow(x[1] - x[0] * x[0], 2);
  };
  const auto a = opt::nelder_mead(f, Eigen::Vector2d(-1.2, 1.0), box);
  const auto b = opt::nelder_mead(f, Eigen::Vector2d(-1.2, 1.0), box);
  CHECK(a.value == b.value);
  CHECK(a.x == b.x);
}

TEST_CASE("start pinned to a corner still improves") {
  const math::Box box({{0.0, 1.0}, {0.0, 1.0}});
  auto f = [](const Eigen::VectorXd& x) {
    return (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5);
  };
  const auto result = opt::nelder_mead(f, Eigen::Vector2d(1.0, 1.0), box);
  CHECK(result.value < 1e-6);
}
