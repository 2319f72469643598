#include "mpctune/gp.hpp"

#include "mpctune/nelder_mead.hpp"
#include "mpctune/parallel.hpp"
#include "mpctune/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace mpctune::gp {

KernelParams::KernelParams(double lengthscale_, double signal_variance_,
                           double noise_variance_)
    : lengthscale(lengthscale_),
      signal_variance(signal_variance_),
      noise_variance(noise_variance_) {
  if (!(lengthscale >= 1e-3 && lengthscale <= 1e3)) {
    throw std::invalid_argument("KernelParams: lengthscale outside [1e-3, 1e3]");
  }
  if (!(signal_variance >= 1e-6 && signal_variance <= 1e6)) {
    throw std::invalid_argument("KernelParams: signal_variance outside [1e-6, 1e6]");
  }
  // noise_variance = 0 is allowed for noise-free interpolation; positive
  // values are capped the same way the fit bounds are.
  if (!(noise_variance >= 0.0 && noise_variance <= 1e2)) {
    throw std::invalid_argument("KernelParams: noise_variance outside [0, 1e2]");
  }
}

double kernel_eval(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                   const KernelParams& kernel) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("kernel_eval: non-finite input");
  }
  const double sq = (a - b).squaredNorm();
  return kernel.signal_variance *
         std::exp(-sq / (2.0 * kernel.lengthscale * kernel.lengthscale));
}

GpModel::GpModel(KernelParams kernel, Eigen::MatrixXd inputs, Eigen::VectorXd targets,
                 double prior_mean)
    : kernel_(kernel),
      inputs_(std::move(inputs)),
      targets_(std::move(targets)),
      prior_mean_(prior_mean) {
  const int n = static_cast<int>(inputs_.rows());
  if (n < 1 || targets_.size() != n) {
    throw std::invalid_argument("GpModel: need n >= 1 inputs with matching targets");
  }
  if (!inputs_.allFinite() || !targets_.allFinite()) {
    throw std::invalid_argument("GpModel: non-finite training data");
  }

  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i) {
    gram(i, i) = kernel_.signal_variance + kernel_.noise_variance;
    for (int j = i + 1; j < n; ++j) {
      const double k = kernel_eval(inputs_.row(i), inputs_.row(j), kernel_);
      gram(i, j) = k;
      gram(j, i) = k;
    }
  }

  jitter_ = 1e-10 * kernel_.signal_variance;
  const double max_jitter = 1e-4 * kernel_.signal_variance;
  for (;;) {
    factorization_.compute(gram + jitter_ * Eigen::MatrixXd::Identity(n, n));
    if (factorization_.info() == Eigen::Success) break;
    jitter_ *= 10.0;
    if (jitter_ > max_jitter) {
      throw NumericalError("GpModel: covariance factorization failed at max jitter");
    }
  }
  alpha_ = factorization_.solve(targets_ - Eigen::VectorXd::Constant(n, prior_mean_));
}

Eigen::VectorXd GpModel::cross_covariance(const Eigen::VectorXd& query) const {
  Eigen::VectorXd k(size());
  for (int i = 0; i < size(); ++i) {
    k[i] = kernel_eval(inputs_.row(i), query, kernel_);
  }
  return k;
}

PosteriorMoments GpModel::posterior(const Eigen::VectorXd& query) const {
  if (query.size() != dim()) {
    throw std::invalid_argument("posterior: query dimension mismatch");
  }
  if (!query.allFinite()) {
    throw std::invalid_argument("posterior: non-finite query");
  }
  const Eigen::VectorXd k = cross_covariance(query);
  PosteriorMoments out;
  out.mean = prior_mean_ + k.dot(alpha_);
  const Eigen::VectorXd v = factorization_.matrixL().solve(k);
  out.variance = kernel_.signal_variance - v.squaredNorm();
  out.variance = std::clamp(out.variance, 0.0, kernel_.signal_variance + 1e-8);
  return out;
}

double GpModel::log_marginal_likelihood() const {
  const int n = size();
  const Eigen::VectorXd residual =
      targets_ - Eigen::VectorXd::Constant(n, prior_mean_);
  double log_det = 0.0;
  const auto& L = factorization_.matrixLLT();
  for (int i = 0; i < n; ++i) log_det += 2.0 * std::log(L(i, i));
  return -0.5 * residual.dot(alpha_) - 0.5 * log_det -
         0.5 * n * std::log(math::kTwoPi);
}

GpModel GpModel::with_observation(const Eigen::VectorXd& input, double target) const {
  Eigen::MatrixXd inputs(size() + 1, dim());
  inputs.topRows(size()) = inputs_;
  inputs.row(size()) = input.transpose();
  Eigen::VectorXd targets(size() + 1);
  targets.head(size()) = targets_;
  targets[size()] = target;
  return GpModel(kernel_, std::move(inputs), std::move(targets), prior_mean_);
}

namespace {

double safe_log_marginal_likelihood(const Eigen::MatrixXd& inputs,
                                    const Eigen::VectorXd& targets,
                                    double prior_mean, const KernelParams& kernel) {
  try {
    return GpModel(kernel, inputs, targets, prior_mean).log_marginal_likelihood();
  } catch (const NumericalError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

FittedGp fit_hyperparameters(const Eigen::MatrixXd& inputs,
                             const Eigen::VectorXd& targets,
                             const FitOptions& options, std::uint64_t seed) {
  const int n = static_cast<int>(inputs.rows());
  if (n < 2) {
    throw std::invalid_argument("fit_hyperparameters: need at least 2 observations");
  }
  if (targets.size() != n) {
    throw std::invalid_argument("fit_hyperparameters: inputs/targets size mismatch");
  }
  const FitBounds& b = options.bounds;
  const double prior_mean = targets.mean();

  const Eigen::Vector3d log_lo(std::log(b.lengthscale_min),
                               std::log(b.signal_variance_min),
                               std::log(b.noise_variance_min));
  const Eigen::Vector3d log_hi(std::log(b.lengthscale_max),
                               std::log(b.signal_variance_max),
                               std::log(b.noise_variance_max));
  const math::Box log_box({{log_lo[0], log_hi[0]},
                           {log_lo[1], log_hi[1]},
                           {log_lo[2], log_hi[2]}});

  auto params_at = [&](const Eigen::VectorXd& log_point) {
    return KernelParams(std::exp(log_point[0]), std::exp(log_point[1]),
                        std::exp(log_point[2]));
  };
  auto negative_lml = [&](const Eigen::VectorXd& log_point) {
    return -safe_log_marginal_likelihood(inputs, targets, prior_mean,
                                         params_at(log_point));
  };

  // Low-discrepancy multistarts, plus one start from data statistics:
  // median-distance lengthscale, target variance as signal variance.
  std::vector<Eigen::VectorXd> starts;
  rng::Stream shift_stream(rng::derive_key({seed, 0x6f70ULL}));
  Eigen::VectorXd shift(3);
  for (int i = 0; i < 3; ++i) shift[i] = shift_stream.uniform();
  math::LowDiscrepancySequence sequence(3, shift);
  for (int r = 0; r < options.restarts; ++r) {
    const Eigen::VectorXd u = sequence.next();
    starts.push_back(log_lo + u.cwiseProduct(log_hi - log_lo));
  }
  {
    std::vector<double> distances;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        distances.push_back((inputs.row(i) - inputs.row(j)).norm());
      }
    }
    double median_distance = 1.0;
    if (!distances.empty()) {
      std::nth_element(distances.begin(), distances.begin() + distances.size() / 2,
                       distances.end());
      median_distance = std::max(distances[distances.size() / 2], 1e-6);
    }
    const double var = std::max(
        (targets.array() - prior_mean).square().sum() / std::max(n - 1, 1), 1e-8);
    Eigen::VectorXd heuristic(3);
    heuristic << std::log(median_distance), std::log(var), std::log(1e-2 * var);
    starts.push_back(log_box.clamp(heuristic));
  }

  FitReport report;
  report.restart_inits.resize(starts.size());
  report.init_likelihoods.resize(starts.size());
  report.final_likelihoods.resize(starts.size());
  std::vector<Eigen::VectorXd> finals(starts.size());

  opt::NelderMeadOptions nm;
  nm.max_evals = options.max_evals_per_restart;
  nm.init_step = 0.10;

  par::parallel_for(starts.size(), [&](std::size_t r) {
    report.restart_inits[r] = starts[r];
    report.init_likelihoods[r] = -negative_lml(starts[r]);
    const auto result = opt::nelder_mead(negative_lml, starts[r], log_box, nm);
    finals[r] = result.x;
    report.final_likelihoods[r] = -result.value;
  });

  // Best likelihood wins; ties resolve to the lowest restart index.
  report.best_restart = 0;
  for (std::size_t r = 1; r < finals.size(); ++r) {
    if (report.final_likelihoods[r] > report.final_likelihoods[report.best_restart]) {
      report.best_restart = static_cast<int>(r);
    }
  }
  report.best_likelihood = report.final_likelihoods[report.best_restart];

  const Eigen::VectorXd best = finals[static_cast<std::size_t>(report.best_restart)];
  return FittedGp{GpModel(params_at(best), inputs, targets, prior_mean),
                  std::move(report)};
}

}  // namespace mpctune::gp
