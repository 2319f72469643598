#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace mpctune::narx {

/// Affine [min, max] -> [0, 1] map for one signal. Out-of-range values map
/// outside the unit interval, which is permitted.
struct SignalRange {
  double min = 0.0;
  double max = 1.0;

  SignalRange() = default;
  SignalRange(double min_, double max_);

  double scale(double physical) const { return (physical - min) / (max - min); }
  double unscale(double scaled) const { return min + scaled * (max - min); }
};

/// Scaling for the three signals the prediction model sees.
struct ScalingSpec {
  SignalRange cB{0.0, 2.0};
  SignalRange TR{100.0, 150.0};
  SignalRange F{5.0, 35.0};
};

/// Second-order polynomial NARX with one output lag and one input lag.
/// Row 0 predicts scaled cB, row 1 predicts scaled TR; columns multiply the
/// basis {1, y1, y2, u, y1^2, y2^2, u^2}.
struct NarxCoeffs {
  Eigen::Matrix<double, 2, 7> c = Eigen::Matrix<double, 2, 7>::Zero();

  /// Flat layout: cB row then TR row.
  Eigen::Matrix<double, 14, 1> flatten() const;
  static NarxCoeffs from_flat(const Eigen::Matrix<double, 14, 1>& flat);
};

inline constexpr double kDefaultClamp = 10.0;

/// One-step prediction of the scaled outputs.
Eigen::Vector2d predict_one_step(const NarxCoeffs& coeffs, const Eigen::Vector2d& y_scaled,
                                 double u_scaled);

/// Iterated one-step predictions over the input sequence. Each predicted
/// output is clamped to [-clamp_limit, clamp_limit]; the iterated polynomial
/// diverges for arbitrary coefficient draws and the clamp keeps downstream
/// objectives finite. Pass infinity to disable.
std::vector<Eigen::Vector2d> simulate_horizon(const NarxCoeffs& coeffs,
                                              const Eigen::Vector2d& y0_scaled,
                                              const std::vector<double>& u_scaled,
                                              double clamp_limit = kDefaultClamp);

/// One (y_k, u_k) -> y_{k+1} training row, all signals scaled.
struct IoRow {
  Eigen::Vector2d y;
  double u = 0.0;
  Eigen::Vector2d y_next;
};

struct LeastSquaresFit {
  NarxCoeffs coeffs;
  bool ridge_fallback = false;  // rank-deficient regressor, lambda = 1e-8
  Eigen::Vector2d rms_residual = Eigen::Vector2d::Zero();
};

/// Per-output ordinary least squares on the 7-term basis. Falls back to
/// ridge regression when the regressor matrix is rank deficient.
LeastSquaresFit fit_least_squares(const std::vector<IoRow>& data);

/// 1 - NRMSE of one-step predictions per output channel, where NRMSE is the
/// residual norm over the norm of deviations from the channel mean.
Eigen::Vector2d one_step_accuracy(const NarxCoeffs& coeffs,
                                  const std::vector<IoRow>& data);

}  // namespace mpctune::narx
