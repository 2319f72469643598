#include "mpctune/narx.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpctune::narx {

SignalRange::SignalRange(double min_, double max_) : min(min_), max(max_) {
  if (!(max > min)) throw std::invalid_argument("SignalRange: max must be > min");
}

Eigen::Matrix<double, 14, 1> NarxCoeffs::flatten() const {
  Eigen::Matrix<double, 14, 1> flat;
  flat.head<7>() = c.row(0).transpose();
  flat.tail<7>() = c.row(1).transpose();
  return flat;
}

NarxCoeffs NarxCoeffs::from_flat(const Eigen::Matrix<double, 14, 1>& flat) {
  NarxCoeffs coeffs;
  coeffs.c.row(0) = flat.head<7>().transpose();
  coeffs.c.row(1) = flat.tail<7>().transpose();
  return coeffs;
}

namespace {
inline Eigen::Matrix<double, 7, 1> basis(const Eigen::Vector2d& y, double u) {
  Eigen::Matrix<double, 7, 1> phi;
  phi << 1.0, y[0], y[1], u, y[0] * y[0], y[1] * y[1], u * u;
  return phi;
}
}  // namespace

Eigen::Vector2d predict_one_step(const NarxCoeffs& coeffs, const Eigen::Vector2d& y_scaled,
                                 double u_scaled) {
  return coeffs.c * basis(y_scaled, u_scaled);
}

std::vector<Eigen::Vector2d> simulate_horizon(const NarxCoeffs& coeffs,
                                              const Eigen::Vector2d& y0_scaled,
                                              const std::vector<double>& u_scaled,
                                              double clamp_limit) {
  if (u_scaled.empty()) {
    throw std::invalid_argument("simulate_horizon: need at least one input");
  }
  std::vector<Eigen::Vector2d> predictions;
  predictions.reserve(u_scaled.size());
  Eigen::Vector2d y = y0_scaled;
  for (double u : u_scaled) {
    y = predict_one_step(coeffs, y, u);
    y[0] = std::clamp(y[0], -clamp_limit, clamp_limit);
    y[1] = std::clamp(y[1], -clamp_limit, clamp_limit);
    predictions.push_back(y);
  }
  return predictions;
}

LeastSquaresFit fit_least_squares(const std::vector<IoRow>& data) {
  const int n = static_cast<int>(data.size());
  if (n < 14) {
    throw std::invalid_argument("fit_least_squares: need at least 14 rows");
  }
  Eigen::MatrixXd regressors(n, 7);
  Eigen::MatrixXd targets(n, 2);
  for (int i = 0; i < n; ++i) {
    regressors.row(i) = basis(data[static_cast<std::size_t>(i)].y,
                              data[static_cast<std::size_t>(i)].u)
                            .transpose();
    targets.row(i) = data[static_cast<std::size_t>(i)].y_next.transpose();
  }

  LeastSquaresFit fit;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(regressors);
  Eigen::MatrixXd solution(7, 2);
  if (qr.rank() < 7) {
    fit.ridge_fallback = true;
    const Eigen::MatrixXd gram = regressors.transpose() * regressors +
                                 1e-8 * Eigen::MatrixXd::Identity(7, 7);
    solution = gram.ldlt().solve(regressors.transpose() * targets);
  } else {
    solution = qr.solve(targets);
  }
  fit.coeffs.c = solution.transpose();

  const Eigen::MatrixXd residual = regressors * solution - targets;
  for (int j = 0; j < 2; ++j) {
    fit.rms_residual[j] = std::sqrt(residual.col(j).squaredNorm() / n);
  }
  return fit;
}

Eigen::Vector2d one_step_accuracy(const NarxCoeffs& coeffs,
                                  const std::vector<IoRow>& data) {
  if (data.empty()) {
    throw std::invalid_argument("one_step_accuracy: empty dataset");
  }
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& row : data) sum += row.y_next;
  const Eigen::Vector2d mean = sum / static_cast<double>(data.size());

  Eigen::Vector2d err2 = Eigen::Vector2d::Zero();
  Eigen::Vector2d dev2 = Eigen::Vector2d::Zero();
  for (const auto& row : data) {
    const Eigen::Vector2d prediction = predict_one_step(coeffs, row.y, row.u);
    err2 += (row.y_next - prediction).cwiseAbs2();
    dev2 += (row.y_next - mean).cwiseAbs2();
  }
  Eigen::Vector2d accuracy;
  for (int j = 0; j < 2; ++j) {
    accuracy[j] = dev2[j] > 0.0 ? 1.0 - std::sqrt(err2[j] / dev2[j])
                                : (err2[j] == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity());
  }
  return accuracy;
}

}  // namespace mpctune::narx
