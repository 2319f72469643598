#pragma once

#include "mpctune/math.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace mpctune {

/// Thrown when a linear-algebra step cannot be stabilized.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace gp {

/// Squared-exponential kernel hyperparameters. Inputs are expected in the
/// normalized unit box; one isotropic lengthscale covers all dimensions.
struct KernelParams {
  double lengthscale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 1e-6;

  KernelParams() = default;
  KernelParams(double lengthscale_, double signal_variance_, double noise_variance_);
};

struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
};

double kernel_eval(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                   const KernelParams& kernel);

/// Immutable GP regression model: training data, constant prior mean, and a
/// cached Cholesky factor of K + sigma^2 I. Safe for concurrent posterior
/// queries once constructed.
class GpModel {
 public:
  /// inputs: n x d matrix, one point per row. Adds an adaptive jitter,
  /// starting at 1e-10 * signal_variance and growing tenfold up to
  /// 1e-4 * signal_variance, if the factorization fails.
  GpModel(KernelParams kernel, Eigen::MatrixXd inputs, Eigen::VectorXd targets,
          double prior_mean);

  int size() const { return static_cast<int>(inputs_.rows()); }
  int dim() const { return static_cast<int>(inputs_.cols()); }
  const KernelParams& kernel() const { return kernel_; }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  double prior_mean() const { return prior_mean_; }
  double jitter() const { return jitter_; }

  PosteriorMoments posterior(const Eigen::VectorXd& query) const;
  double log_marginal_likelihood() const;

  /// New model with one extra observation, same hyperparameters.
  GpModel with_observation(const Eigen::VectorXd& input, double target) const;

 private:
  Eigen::VectorXd cross_covariance(const Eigen::VectorXd& query) const;

  KernelParams kernel_;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  double prior_mean_ = 0.0;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> factorization_;
  Eigen::VectorXd alpha_;  // (K + sigma^2 I)^-1 (y - m)
};

/// Box bounds for hyperparameter fitting, in natural units.
struct FitBounds {
  double lengthscale_min = 5e-2;
  double lengthscale_max = 2e1;
  double signal_variance_min = 1e-6;
  double signal_variance_max = 1e6;
  double noise_variance_min = 1e-10;
  double noise_variance_max = 1e2;
};

struct FitOptions {
  FitBounds bounds;
  int restarts = 8;
  int max_evals_per_restart = 400;
};

struct FitReport {
  /// Multistart initial points in log-space (log l, log sv, log nv) and the
  /// likelihood at each, for the optimizer contract and determinism checks.
  std::vector<Eigen::Vector3d> restart_inits;
  std::vector<double> init_likelihoods;
  std::vector<double> final_likelihoods;
  int best_restart = -1;
  double best_likelihood = 0.0;
};

struct FittedGp {
  GpModel model;
  FitReport report;
};

/// Point-estimate hyperparameter fit: maximizes the log marginal likelihood
/// in log-space over the given bounds via multistart Nelder-Mead from a
/// seeded low-discrepancy design (plus one data-driven start). The prior mean
/// is the empirical mean of the targets. Deterministic given seed; restarts
/// may run on multiple threads with a deterministic best-of merge.
FittedGp fit_hyperparameters(const Eigen::MatrixXd& inputs,
                             const Eigen::VectorXd& targets,
                             const FitOptions& options, std::uint64_t seed);

}  // namespace gp
}  // namespace mpctune
