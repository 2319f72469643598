#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mpctune/gp.hpp"
#include "mpctune/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <vector>

using namespace mpctune;

namespace {

// Independent dense-inverse oracle: explicit matrix inversion, no Cholesky.
struct DenseOracle {
  static Eigen::MatrixXd gram(const Eigen::MatrixXd& X, const gp::KernelParams& k) {
    const int n = static_cast<int>(X.rows());
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double sq = (X.row(i) - X.row(j)).squaredNorm();
        K(i, j) = k.signal_variance * std::exp(-sq / (2.0 * k.lengthscale * k.lengthscale));
      }
    }
    return K + k.noise_variance * Eigen::MatrixXd::Identity(n, n);
  }

  static gp::PosteriorMoments posterior(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y, double m,
                                        const gp::KernelParams& k,
                                        const Eigen::VectorXd& q) {
    const int n = static_cast<int>(X.rows());
    const Eigen::MatrixXd K_inv = gram(X, k).inverse();
    Eigen::VectorXd kv(n);
    for (int i = 0; i < n; ++i) {
      const double sq = (X.row(i).transpose() - q).squaredNorm();
      kv[i] = k.signal_variance * std::exp(-sq / (2.0 * k.lengthscale * k.lengthscale));
    }
    gp::PosteriorMoments out;
    out.mean = m + kv.dot(K_inv * (y - Eigen::VectorXd::Constant(n, m)));
    out.variance = k.signal_variance - kv.dot(K_inv * kv);
    return out;
  }

  static double lml(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double m,
                    const gp::KernelParams& k) {
    const int n = static_cast<int>(X.rows());
    const Eigen::MatrixXd K = gram(X, k);
    const Eigen::VectorXd r = y - Eigen::VectorXd::Constant(n, m);
    return -0.5 * r.dot(K.inverse() * r) - 0.5 * std::log(K.determinant()) -
           0.5 * n * std::log(2.0 * M_PI);
  }
};

Eigen::MatrixXd random_inputs(rng::Stream& stream, int n, int d) {
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) X(i, j) = stream.uniform();
  }
  return X;
}

/// Draws targets from the GP prior (plus observation noise) via the dense
/// covariance square root.
Eigen::VectorXd sample_from_gp(const Eigen::MatrixXd& X, const gp::KernelParams& k,
                               rng::Stream& stream) {
  const int n = static_cast<int>(X.rows());
  gp::KernelParams noiseless = k;
  noiseless.noise_variance = 0.0;
  Eigen::MatrixXd K = DenseOracle::gram(X, noiseless);
  K += 1e-10 * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd L = K.llt().matrixL();
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = stream.normal();
  Eigen::VectorXd y = L * z;
  for (int i = 0; i < n; ++i) y[i] += std::sqrt(k.noise_variance) * stream.normal();
  return y;
}

}  // namespace

TEST_CASE("kernel at zero distance equals the signal variance") {
  const Eigen::Vector3d a(0.3, -0.2, 0.9);
  CHECK(gp::kernel_eval(a, a, gp::KernelParams(1.0, 1.0, 0.0)) == doctest::Approx(1.0));
  CHECK(gp::kernel_eval(a, a, gp::KernelParams(0.2, 2.5, 0.0)) == doctest::Approx(2.5));
}

TEST_CASE("kernel at distance l*sqrt(2) equals exp(-1)") {
  const double l = 0.37;
  Eigen::VectorXd a(2), b(2);
  a << 0.0, 0.0;
  b << l * std::sqrt(2.0), 0.0;
  CHECK(gp::kernel_eval(a, b, gp::KernelParams(l, 1.0, 0.0)) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("kernel matches scalar evaluation on random 3-D points") {
  rng::Stream stream(12);
  const gp::KernelParams k(0.7, 2.5, 0.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Vector3d a, b;
    for (int i = 0; i < 3; ++i) {
      a[i] = stream.uniform(-1.0, 1.0);
      b[i] = stream.uniform(-1.0, 1.0);
    }
    double sq = 0.0;
    for (int i = 0; i < 3; ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
    const double expected = 2.5 * std::exp(-sq / (2.0 * 0.7 * 0.7));
    CHECK(gp::kernel_eval(a, b, k) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(gp::kernel_eval(a, b, k) == gp::kernel_eval(b, a, k));
  }
}

TEST_CASE("kernel rejects dimension mismatch") {
  Eigen::VectorXd a(2), b(3);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(gp::kernel_eval(a, b, gp::KernelParams()), std::invalid_argument);
}

TEST_CASE("single noise-free observation is interpolated") {
  Eigen::MatrixXd X(1, 2);
  X << 0.4, 0.6;
  Eigen::VectorXd y(1);
  y << 1.7;
  const gp::GpModel model(gp::KernelParams(0.5, 1.0, 0.0), X, y, 0.0);
  const auto at_input = model.posterior(X.row(0));
  CHECK(at_input.mean == doctest::Approx(1.7).epsilon(1e-10));
  CHECK(at_input.variance < 1e-9);
}

TEST_CASE("query far from data recovers the prior") {
  Eigen::MatrixXd X(1, 2);
  X << 0.0, 0.0;
  Eigen::VectorXd y(1);
  y << 3.0;
  const double prior_mean = -0.5;
  const gp::GpModel model(gp::KernelParams(0.05, 1.3, 1e-4), X, y, prior_mean);
  Eigen::VectorXd far(2);
  far << 50.0, 50.0;
  const auto moments = model.posterior(far);
  CHECK(moments.mean == doctest::Approx(prior_mean).epsilon(1e-12));
  CHECK(moments.variance == doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("posterior rejects bad queries") {
  Eigen::MatrixXd X(1, 2);
  X.setZero();
  Eigen::VectorXd y(1);
  y.setZero();
  const gp::GpModel model(gp::KernelParams(), X, y, 0.0);
  Eigen::VectorXd q(2);
  q << 0.1, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(model.posterior(q), std::invalid_argument);
  CHECK_THROWS_AS(model.posterior(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("posterior matches the dense-inverse oracle") {
  rng::Stream stream(77);
  const gp::KernelParams k(0.6, 1.8, 0.01);
  const Eigen::MatrixXd X = random_inputs(stream, 10, 3);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) y[i] = stream.normal();
  const double prior_mean = 0.3;
  const gp::GpModel model(k, X, y, prior_mean);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd q(3);
    for (int j = 0; j < 3; ++j) q[j] = stream.uniform();
    const auto got = model.posterior(q);
    const auto expected = DenseOracle::posterior(X, y, prior_mean, k, q);
    CHECK(got.mean == doctest::Approx(expected.mean).epsilon(1e-8));
    CHECK(got.variance == doctest::Approx(expected.variance).epsilon(1e-8));
  }
}

TEST_CASE("log marginal likelihood analytic single point") {
  // K + sigma^2 I = [1], y = m: only the normalizing terms survive.
  Eigen::MatrixXd X(1, 1);
  X << 0.5;
  Eigen::VectorXd y(1);
  y << 2.0;
  const gp::GpModel model(gp::KernelParams(1.0, 1.0, 0.0), X, y, 2.0);
  CHECK(model.log_marginal_likelihood() ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-9));
}

TEST_CASE("noise doubling changes the likelihood as the closed form predicts") {
  // Two distant points: K is effectively diagonal, so
  // lml = -sum r_i^2/(2(sv+nv)) - log(sv+nv) - log(2 pi).
  Eigen::MatrixXd X(2, 1);
  X << 0.0, 1e3;
  Eigen::VectorXd y(2);
  y << 1.0, -2.0;
  const double m = 0.0;
  const double sv = 0.8;
  auto closed_form = [&](double nv) {
    const double s = sv + nv;
    return -(1.0 + 4.0) / (2.0 * s) - std::log(s) - std::log(2.0 * M_PI);
  };
  for (double nv : {0.05, 0.1}) {
    const gp::GpModel model(gp::KernelParams(1.0, sv, nv), X, y, m);
    CHECK(model.log_marginal_likelihood() ==
          doctest::Approx(closed_form(nv)).epsilon(1e-10));
  }
}

TEST_CASE("log marginal likelihood matches the dense oracle") {
  rng::Stream stream(31);
  const gp::KernelParams k(0.9, 2.2, 0.05);
  const Eigen::MatrixXd X = random_inputs(stream, 5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) y[i] = stream.normal(1.0, 2.0);
  const gp::GpModel model(k, X, y, 1.0);
  CHECK(model.log_marginal_likelihood() ==
        doctest::Approx(DenseOracle::lml(X, y, 1.0, k)).epsilon(1e-8));
}

TEST_CASE("oracle equivalence across 50 random datasets") {
  rng::Stream stream(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(stream.uniform() * 19);  // up to 20
    const int d = 1 + static_cast<int>(stream.uniform() * 15);  // up to 15
    const gp::KernelParams k(stream.uniform(0.3, 2.0), stream.uniform(0.5, 5.0),
                             stream.uniform(1e-4, 0.1));
    const Eigen::MatrixXd X = random_inputs(stream, n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = stream.normal(0.0, 2.0);
    const double m = stream.uniform(-1.0, 1.0);
    const gp::GpModel model(k, X, y, m);

    CHECK(model.log_marginal_likelihood() ==
          doctest::Approx(DenseOracle::lml(X, y, m, k)).epsilon(1e-8));
    Eigen::VectorXd q(d);
    for (int j = 0; j < d; ++j) q[j] = stream.uniform();
    const auto got = model.posterior(q);
    const auto expected = DenseOracle::posterior(X, y, m, k, q);
    CHECK(got.mean == doctest::Approx(expected.mean).epsilon(1e-8));
    CHECK(got.variance ==
          doctest::Approx(std::max(expected.variance, 0.0)).epsilon(1e-8));
  }
}

TEST_CASE("posterior variance stays within [0, signal variance]") {
  rng::Stream stream(8);
  const gp::KernelParams k(0.4, 2.0, 1e-6);
  const Eigen::MatrixXd X = random_inputs(stream, 15, 4);
  Eigen::VectorXd y(15);
  for (int i = 0; i < 15; ++i) y[i] = stream.normal();
  const gp::GpModel model(k, X, y, 0.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd q(4);
    for (int j = 0; j < 4; ++j) q[j] = stream.uniform(-0.5, 1.5);
    const auto moments = model.posterior(q);
    CHECK(moments.variance >= 0.0);
    CHECK(moments.variance <= 2.0 + 1e-8);
  }
}

TEST_CASE("noise-free interpolation at every training input") {
  rng::Stream stream(55);
  const Eigen::MatrixXd X = random_inputs(stream, 8, 3);
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) y[i] = std::sin(4.0 * X(i, 0)) + X(i, 1);
  const gp::GpModel model(gp::KernelParams(0.8, 1.5, 0.0), X, y, y.mean());
  for (int i = 0; i < 8; ++i) {
    CHECK(model.posterior(X.row(i)).mean == doctest::Approx(y[i]).epsilon(1e-6));
  }
}

TEST_CASE("permuting training points leaves the posterior unchanged") {
  rng::Stream stream(66);
  const gp::KernelParams k(0.5, 1.0, 1e-3);
  const int n = 12;
  const Eigen::MatrixXd X = random_inputs(stream, n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = stream.normal();

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(stream.uniform() * (i + 1))]);
  }
  Eigen::MatrixXd Xp(n, 3);
  Eigen::VectorXd yp(n);
  for (int i = 0; i < n; ++i) {
    Xp.row(i) = X.row(perm[static_cast<std::size_t>(i)]);
    yp[i] = y[perm[static_cast<std::size_t>(i)]];
  }

  const gp::GpModel a(k, X, y, 0.0);
  const gp::GpModel b(k, Xp, yp, 0.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd q(3);
    for (int j = 0; j < 3; ++j) q[j] = stream.uniform();
    const auto ma = a.posterior(q);
    const auto mb = b.posterior(q);
    CHECK(ma.mean == doctest::Approx(mb.mean).epsilon(1e-10));
    CHECK(ma.variance == doctest::Approx(mb.variance).epsilon(1e-10));
  }
}

TEST_CASE("adding an observation never raises the variance there") {
  rng::Stream stream(91);
  const gp::KernelParams k(0.6, 1.2, 1e-2);
  const Eigen::MatrixXd X = random_inputs(stream, 10, 3);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) y[i] = stream.normal();
  const gp::GpModel model(k, X, y, 0.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd q(3);
    for (int j = 0; j < 3; ++j) q[j] = stream.uniform();
    const double before = model.posterior(q).variance;
    const auto grown = model.with_observation(q, stream.normal());
    CHECK(grown.posterior(q).variance <= before + 1e-8);
  }
}

TEST_CASE("fit on constant targets drives noise to its lower bound") {
  rng::Stream stream(14);
  const Eigen::MatrixXd X = random_inputs(stream, 12, 3);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(12, 4.2);
  const auto fitted = gp::fit_hyperparameters(X, y, {}, 5);
  CHECK(fitted.model.kernel().noise_variance <= 1e-8);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd q(3);
    for (int j = 0; j < 3; ++j) q[j] = stream.uniform();
    CHECK(fitted.model.posterior(q).mean == doctest::Approx(4.2).epsilon(1e-6));
  }
}

TEST_CASE("fit recovers a known lengthscale within a factor of two") {
  rng::Stream stream(700);
  const gp::KernelParams truth(0.3, 1.0, 0.01);
  const Eigen::MatrixXd X = random_inputs(stream, 60, 3);
  const Eigen::VectorXd y = sample_from_gp(X, truth, stream);
  const auto fitted = gp::fit_hyperparameters(X, y, {}, 42);
  CHECK(fitted.model.kernel().lengthscale >= 0.15);
  CHECK(fitted.model.kernel().lengthscale <= 0.6);
}

TEST_CASE("fitted likelihood dominates every multistart initial point") {
  rng::Stream stream(81);
  const Eigen::MatrixXd X = random_inputs(stream, 20, 2);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) y[i] = std::cos(5.0 * X(i, 0)) + 0.2 * stream.normal();
  const auto fitted = gp::fit_hyperparameters(X, y, {}, 9);
  for (double init_likelihood : fitted.report.init_likelihoods) {
    CHECK(fitted.report.best_likelihood >= init_likelihood - 1e-9);
  }
  CHECK(fitted.report.best_likelihood ==
        doctest::Approx(fitted.model.log_marginal_likelihood()).epsilon(1e-9));
}

TEST_CASE("fit refuses fewer than two observations") {
  Eigen::MatrixXd X(1, 2);
  X.setZero();
  Eigen::VectorXd y(1);
  y.setZero();
  CHECK_THROWS_AS(gp::fit_hyperparameters(X, y, {}, 0), std::invalid_argument);
}

TEST_CASE("kernel parameter bounds are enforced at construction") {
  CHECK_THROWS_AS(gp::KernelParams(1e-4, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gp::KernelParams(1.0, 1e7, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gp::KernelParams(1.0, 1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(gp::KernelParams(1.0, 1.0, 1e3), std::invalid_argument);
}
