#include <doctest.h>

#include <cmath>

#include "mmg/errors.hpp"
#include "mmg/gaussian.hpp"
#include "support/test_util.hpp"

using namespace mmg;
using mmg_test::NA;

namespace {

// Conditional moments of the first `nmis` scope coordinates given the rest,
// by direct density-ratio quadrature on a grid.  Independent of the Schur
// path under test; only valid for nmis == 1.
struct GridMoments {
  double mean = 0;
  double var = 0;
};

GridMoments density_ratio_oracle(const Eigen::VectorXd& mu,
                                 const Eigen::MatrixXd& sigma,
                                 const Eigen::VectorXd& xobs) {
  const int d = static_cast<int>(mu.size());
  Eigen::MatrixXd prec = sigma.inverse();
  const double sd = std::sqrt(sigma(0, 0));
  const double lo = mu[0] - 12 * sd, hi = mu[0] + 12 * sd;
  const int steps = 16001;
  const double h = (hi - lo) / (steps - 1);
  double w0 = 0, w1 = 0, w2 = 0;
  Eigen::VectorXd v(d);
  v.tail(d - 1) = xobs;
  for (int k = 0; k < steps; ++k) {
    const double t = lo + k * h;
    v[0] = t;
    Eigen::VectorXd diff = v - mu;
    double f = std::exp(-0.5 * diff.dot(prec * diff));
    double w = (k == 0 || k == steps - 1) ? 0.5 : 1.0;  // trapezoid
    w0 += w * f;
    w1 += w * f * t;
    w2 += w * f * t * t;
  }
  GridMoments g;
  g.mean = w1 / w0;
  g.var = w2 / w0 - g.mean * g.mean;
  return g;
}

}  // namespace

TEST_SUITE_BEGIN("gaussian");

TEST_CASE("two-point fit gives the textbook MLE") {
  DataMatrix d = mmg_test::make_data(2, {{0, 0}, {2, 2}});
  GaussianParams p = fit_gaussian_rows(d, {0, 1}, {1, 2});
  CHECK(p.mean[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.mean[1] == doctest::Approx(1.0).epsilon(1e-15));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      CHECK(p.cov(a, b) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.cov_singular);  // rank one
}

TEST_CASE("fit uses every row observing the model pattern") {
  // Chain 1-2-3; rows with X3 missing still qualify for s = 100.
  auto g = mmg_test::chain_graph(3);
  DataMatrix d = mmg_test::make_data(3, {{1, 2, 3},
                                         {2, 3, 4},
                                         {3, 4, NA},
                                         {4, 5, NA},
                                         {NA, 1, 2}});
  ConnectedPattern s = Pattern::from_string("100");
  GaussianParams p = fit_gaussian(d, s, g);
  CHECK(p.scope == std::vector<int>{1, 2});
  // Rows 0..3 qualify (R >= 110); row 4 does not.
  CHECK(p.mean[0] == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(p.mean[1] == doctest::Approx(3.5).epsilon(1e-15));
  // MLE covariance over {1,2,3,4}: variance 1.25.
  CHECK(p.cov(0, 0) == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(p.cov(0, 1) == doctest::Approx(1.25).epsilon(1e-15));
}

TEST_CASE("insufficient qualifying rows raise no-support") {
  auto g = mmg_test::chain_graph(2);
  DataMatrix d = mmg_test::make_data(2, {{1, 2}, {NA, 3}});
  CHECK_THROWS_AS(fit_gaussian(d, Pattern::from_string("10"), g),
                  NoSupportError);
}

TEST_CASE("sample moments approach the truth") {
  // n = 200 draws from a known bivariate normal; 5 sigma MC tolerance.
  const int n = 200;
  Eigen::VectorXd mu(2);
  mu << 1.0, 2.0;
  Eigen::MatrixXd sigma(2, 2);
  sigma << 2.0, 0.6, 0.6, 1.0;
  Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
  RandomStream rng(8675309);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd z(2);
    z << rng.normal(), rng.normal();
    Eigen::VectorXd x = mu + chol * z;
    rows.push_back({x[0], x[1]});
  }
  DataMatrix d = mmg_test::make_data(2, rows);
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  GaussianParams p = fit_gaussian_rows(d, all, {1, 2});
  for (int j = 0; j < 2; ++j) {
    double se = std::sqrt(sigma(j, j) / n);
    CHECK(std::abs(p.mean[j] - mu[j]) < 5 * se);
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double se =
          std::sqrt((sigma(a, b) * sigma(a, b) + sigma(a, a) * sigma(b, b)) /
                    n);
      CHECK(std::abs(p.cov(a, b) - sigma(a, b)) < 5 * se);
    }
}

TEST_CASE("schur conditional matches the closed form") {
  GaussianParams p;
  p.scope = {1, 2};
  p.mean = Eigen::VectorXd::Zero(2);
  p.cov.resize(2, 2);
  p.cov << 1.0, 0.5, 0.5, 1.0;
  Eigen::VectorXd x2(1);
  x2 << 2.0;
  auto cond = gaussian_conditional(p, {2}, x2);
  REQUIRE(cond.missing == std::vector<int>{1});
  CHECK(cond.mean[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cond.cov(0, 0) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("diagonal covariance makes conditionals marginal") {
  GaussianParams p;
  p.scope = {1, 2, 3};
  p.mean.resize(3);
  p.mean << -1.0, 0.5, 2.0;
  p.cov = Eigen::Vector3d(0.5, 2.0, 1.5).asDiagonal();
  for (double v : {-3.0, 0.0, 7.5}) {
    Eigen::VectorXd obs(2);
    obs << v, -v;
    auto cond = gaussian_conditional(p, {2, 3}, obs);
    CHECK(cond.mean[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(cond.cov(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("conditional moments match the density-ratio oracle") {
  RandomStream rng(77);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::MatrixXd a(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = rng.normal();
    Eigen::MatrixXd sigma =
        a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(4, 4);
    Eigen::VectorXd mu(4);
    for (int i = 0; i < 4; ++i) mu[i] = rng.normal();

    GaussianParams p;
    p.scope = {1, 2, 3, 4};
    p.mean = mu;
    p.cov = sigma;
    Eigen::VectorXd xobs(3);
    for (int i = 0; i < 3; ++i) xobs[i] = mu[i + 1] + 0.7 * rng.normal();

    auto cond = gaussian_conditional(p, {2, 3, 4}, xobs);
    auto oracle = density_ratio_oracle(mu, sigma, xobs);
    CHECK(cond.mean[0] == doctest::Approx(oracle.mean).epsilon(1e-8));
    CHECK(cond.cov(0, 0) == doctest::Approx(oracle.var).epsilon(1e-8));
  }
}

TEST_CASE("singular conditioning blocks are reported") {
  GaussianParams p;
  p.scope = {1, 2, 3};
  p.mean = Eigen::VectorXd::Zero(3);
  p.cov.resize(3, 3);
  // Variables 2 and 3 perfectly correlated.
  p.cov << 1.0, 0.3, 0.3, 0.3, 1.0, 1.0, 0.3, 1.0, 1.0;
  Eigen::VectorXd obs(2);
  obs << 1.0, 1.0;
  CHECK_THROWS_AS(gaussian_conditional(p, {2, 3}, obs), SingularityError);
}

TEST_CASE("empty conditioning set returns the marginal") {
  GaussianParams p;
  p.scope = {1, 2};
  p.mean.resize(2);
  p.mean << 3.0, -1.0;
  p.cov.resize(2, 2);
  p.cov << 2.0, 0.4, 0.4, 1.0;
  auto cond = gaussian_conditional(p, {}, Eigen::VectorXd(0));
  CHECK(cond.mean == p.mean);
  CHECK(cond.cov == p.cov);
}

TEST_SUITE_END();
