#pragma once

#include "mpctune/math.hpp"

#include <Eigen/Dense>

#include <functional>

namespace mpctune::opt {

struct NelderMeadOptions {
  int max_evals = 500;
  double x_tol = 1e-10;       // simplex diameter stop
  double f_tol = 1e-12;       // spread of vertex values stop
  double init_step = 0.05;    // initial simplex edge, fraction of box width
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evals = 0;
};

/// Minimizes f over a box with the Nelder-Mead simplex method. Candidate
/// vertices are projected (clamped) onto the box before evaluation, so every
/// evaluated point is feasible. Deterministic.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const math::Box& box,
                             const NelderMeadOptions& options = {});

}  // namespace mpctune::opt
