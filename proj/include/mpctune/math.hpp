#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mpctune::math {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Standard normal density.
inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(kTwoPi);
}

/// Standard normal CDF via erfc, accurate in both tails.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

/// Axis-aligned box of per-dimension [lo, hi] bounds.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<std::pair<double, double>> bounds)
      : bounds_(std::move(bounds)) {
    for (const auto& [lo, hi] : bounds_) {
      if (!(lo < hi)) throw std::invalid_argument("Box: lo must be < hi");
    }
  }

  static Box unit(int dim) {
    return Box(std::vector<std::pair<double, double>>(
        static_cast<std::size_t>(dim), {0.0, 1.0}));
  }

  int dim() const { return static_cast<int>(bounds_.size()); }
  double lo(int i) const { return bounds_[static_cast<std::size_t>(i)].first; }
  double hi(int i) const { return bounds_[static_cast<std::size_t>(i)].second; }

  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
    if (x.size() != dim()) return false;
    for (int i = 0; i < dim(); ++i) {
      if (x[i] < lo(i) - tol || x[i] > hi(i) + tol) return false;
    }
    return true;
  }

  Eigen::VectorXd clamp(Eigen::VectorXd x) const {
    for (int i = 0; i < dim(); ++i) {
      x[i] = std::min(std::max(x[i], lo(i)), hi(i));
    }
    return x;
  }

  /// Affine map from this box to [0,1]^d.
  Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const {
    Eigen::VectorXd u(dim());
    for (int i = 0; i < dim(); ++i) u[i] = (x[i] - lo(i)) / (hi(i) - lo(i));
    return u;
  }

  /// Inverse of to_unit.
  Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const {
    Eigen::VectorXd x(dim());
    for (int i = 0; i < dim(); ++i) x[i] = lo(i) + u[i] * (hi(i) - lo(i));
    return x;
  }

 private:
  std::vector<std::pair<double, double>> bounds_;
};

/// Additive-recurrence low-discrepancy sequence (Kronecker sequence with the
/// generalized golden ratio per dimension), offset by a per-run shift so
/// designs differ across seeds while staying deterministic.
class LowDiscrepancySequence {
 public:
  LowDiscrepancySequence(int dim, const Eigen::VectorXd& shift)
      : alpha_(dim), state_(shift) {
    double phi = 2.0;
    for (int it = 0; it < 64; ++it) {
      phi = std::pow(1.0 + phi, 1.0 / (dim + 1.0));
    }
    double a = 1.0;
    for (int j = 0; j < dim; ++j) {
      a /= phi;
      alpha_[j] = a;
    }
  }

  /// Next point in [0,1)^dim.
  Eigen::VectorXd next() {
    for (int j = 0; j < state_.size(); ++j) {
      state_[j] += alpha_[j];
      state_[j] -= std::floor(state_[j]);
    }
    return state_;
  }

 private:
  Eigen::VectorXd alpha_;
  Eigen::VectorXd state_;
};

}  // namespace mpctune::math
