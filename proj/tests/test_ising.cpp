#include <doctest.h>

#include <cmath>

#include "mmg/errors.hpp"
#include "mmg/ising.hpp"
#include "mmg/rng.hpp"
#include "support/test_util.hpp"

using namespace mmg;

namespace {

// All 2^m configurations as rows.
Eigen::MatrixXd all_configs(int m) {
  Eigen::MatrixXd x(1 << m, m);
  for (int b = 0; b < (1 << m); ++b)
    for (int j = 0; j < m; ++j) x(b, j) = (b >> j) & 1;
  return x;
}

Eigen::VectorXd exact_pmf(const Eigen::VectorXd& field,
                          const Eigen::MatrixXd& coupling) {
  const int m = static_cast<int>(field.size());
  double lz = ising_log_partition(field, coupling);
  Eigen::MatrixXd x = all_configs(m);
  Eigen::VectorXd p(1 << m);
  for (int b = 0; b < (1 << m); ++b) {
    double e = 0;
    for (int u = 0; u < m; ++u) {
      e += field[u] * x(b, u);
      for (int v = u + 1; v < m; ++v)
        e += 2.0 * coupling(u, v) * x(b, u) * x(b, v);
    }
    p[b] = std::exp(e - lz);
  }
  return p;
}

std::vector<int> iota_scope(int m) {
  std::vector<int> s(m);
  for (int j = 0; j < m; ++j) s[j] = j + 1;
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("ising");

TEST_CASE("uniform two-coin data fits to zero parameters") {
  Eigen::MatrixXd x = all_configs(2);  // each cell once = uniform
  Eigen::VectorXd w = Eigen::VectorXd::Ones(4);
  IsingOptions opts;
  IsingParams p = fit_ising_weighted(x, w, {1, 2}, opts);
  CHECK(std::abs(p.field[0]) < 1e-6);
  CHECK(std::abs(p.field[1]) < 1e-6);
  CHECK(std::abs(p.coupling(0, 1)) < 1e-6);
}

TEST_CASE("single variable at rate one half fits to zero field") {
  Eigen::MatrixXd x(2, 1);
  x << 0, 1;
  IsingParams p =
      fit_ising_weighted(x, Eigen::VectorXd::Ones(2), {1}, IsingOptions{});
  CHECK(std::abs(p.field[0]) < 1e-8);
  CHECK(p.log_partition == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("weighted fit on an exact pmf recovers the parameters") {
  const int m = 3;
  Eigen::VectorXd field(m);
  field << 0.4, -0.7, 0.2;
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(m, m);
  coupling(0, 1) = coupling(1, 0) = 0.5;
  coupling(1, 2) = coupling(2, 1) = -0.3;
  Eigen::VectorXd w = exact_pmf(field, coupling);
  IsingOptions opts;
  opts.tol = 1e-10;
  opts.max_iter = 5000;
  IsingParams p = fit_ising_weighted(all_configs(m), w, iota_scope(m), opts);
  for (int j = 0; j < m; ++j)
    CHECK(p.field[j] == doctest::Approx(field[j]).epsilon(1e-6));
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v)
      CHECK(p.coupling(u, v) == doctest::Approx(coupling(u, v)).epsilon(1e-6));

  // The stored normalizer makes the pmf sum to one.
  Eigen::VectorXd pmf = exact_pmf(p.field, p.coupling);
  double total = 0;
  Eigen::MatrixXd x = all_configs(m);
  for (int b = 0; b < (1 << m); ++b) {
    double e = 0;
    for (int u = 0; u < m; ++u) {
      e += p.field[u] * x(b, u);
      for (int v = u + 1; v < m; ++v)
        e += 2.0 * p.coupling(u, v) * x(b, u) * x(b, v);
    }
    total += std::exp(e - p.log_partition);
  }
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("analytic gradient matches central finite differences") {
  RandomStream rng(5150);
  for (int m : {2, 3, 5}) {
    Eigen::VectorXd field(m);
    Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) field[j] = 0.6 * rng.normal();
    for (int u = 0; u < m; ++u)
      for (int v = u + 1; v < m; ++v)
        coupling(u, v) = coupling(v, u) = 0.4 * rng.normal();
    // Random positive weights over all configurations.
    Eigen::VectorXd w(1 << m);
    for (int b = 0; b < (1 << m); ++b) w[b] = 0.1 + rng.uniform01();
    Eigen::MatrixXd x = all_configs(m);

    Eigen::VectorXd grad;
    ising_loglik(x, w, field, coupling, &grad);

    // Linear index -> (u,v) pair in the same order the gradient packs.
    std::vector<std::pair<int, int>> pairs;
    for (int u = 0; u < m; ++u)
      for (int v = u + 1; v < m; ++v) pairs.emplace_back(u, v);

    const double h = 1e-6;
    auto bumped = [&](int idx, double delta) {
      Eigen::VectorXd f2 = field;
      Eigen::MatrixXd c2 = coupling;
      if (idx < m) {
        f2[idx] += delta;
      } else {
        auto [u, v] = pairs[idx - m];
        c2(u, v) += delta;
        c2(v, u) += delta;
      }
      return ising_loglik(x, w, f2, c2, nullptr);
    };
    for (int k = 0; k < m + m * (m - 1) / 2; ++k) {
      double numeric = (bumped(k, h) - bumped(k, -h)) / (2 * h);
      double denom = std::max(1.0, std::abs(numeric));
      CHECK(std::abs(grad[k] - numeric) / denom < 1e-6);
    }
  }
}

TEST_CASE("zero coupling factorizes the conditional") {
  IsingParams p;
  p.scope = {1, 2, 3};
  p.field.resize(3);
  p.field << 0.3, -0.2, 0.8;
  p.coupling = Eigen::MatrixXd::Zero(3, 3);
  p.log_partition = ising_log_partition(p.field, p.coupling);
  // Condition on x3 at both values; conditional over (x1,x2) must be the
  // product of marginals either way.
  for (double x3 : {0.0, 1.0}) {
    Eigen::VectorXd v(1);
    v << x3;
    auto cond = ising_conditional_pmf(p, {3}, v);
    REQUIRE(cond.pmf.size() == 4);
    double p1 = 1.0 / (1.0 + std::exp(-p.field[0]));
    double p2 = 1.0 / (1.0 + std::exp(-p.field[1]));
    CHECK(cond.pmf[0] ==
          doctest::Approx((1 - p1) * (1 - p2)).epsilon(1e-12));
    CHECK(cond.pmf[1] == doctest::Approx(p1 * (1 - p2)).epsilon(1e-12));
    CHECK(cond.pmf[2] == doctest::Approx((1 - p1) * p2).epsilon(1e-12));
    CHECK(cond.pmf[3] == doctest::Approx(p1 * p2).epsilon(1e-12));
  }
}

TEST_CASE("two-variable conditional is the logistic form") {
  IsingParams p;
  p.scope = {1, 2};
  p.field.resize(2);
  p.field << 0.4, -0.9;
  p.coupling = Eigen::MatrixXd::Zero(2, 2);
  p.coupling(0, 1) = p.coupling(1, 0) = 0.7;
  p.log_partition = ising_log_partition(p.field, p.coupling);
  for (double x2 : {0.0, 1.0}) {
    Eigen::VectorXd v(1);
    v << x2;
    auto cond = ising_conditional_pmf(p, {2}, v);
    double expit = 1.0 / (1.0 + std::exp(-(p.field[0] + 2 * 0.7 * x2)));
    CHECK(cond.pmf[1] == doctest::Approx(expit).epsilon(1e-12));
    CHECK(cond.pmf[0] + cond.pmf[1] == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("conditioning on everything leaves a point mass") {
  IsingParams p;
  p.scope = {1, 2};
  p.field = Eigen::VectorXd::Zero(2);
  p.coupling = Eigen::MatrixXd::Zero(2, 2);
  p.log_partition = ising_log_partition(p.field, p.coupling);
  Eigen::VectorXd v(2);
  v << 1, 0;
  auto cond = ising_conditional_pmf(p, {1, 2}, v);
  REQUIRE(cond.pmf.size() == 1);
  CHECK(cond.pmf[0] == 1.0);
  CHECK(cond.missing.empty());
}

TEST_CASE("conditional pmfs always sum to one") {
  RandomStream rng(31337);
  for (int rep = 0; rep < 50; ++rep) {
    int m = 2 + static_cast<int>(rng.uniform_index(5));  // 2..6
    IsingParams p;
    p.scope = iota_scope(m);
    p.field.resize(m);
    p.coupling = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) p.field[j] = rng.normal();
    for (int u = 0; u < m; ++u)
      for (int v = u + 1; v < m; ++v)
        p.coupling(u, v) = p.coupling(v, u) = 0.5 * rng.normal();
    p.log_partition = ising_log_partition(p.field, p.coupling);
    int nobs = static_cast<int>(rng.uniform_index(m));
    std::vector<int> obs;
    Eigen::VectorXd vals(nobs);
    for (int a = 0; a < nobs; ++a) {
      obs.push_back(a + 1);
      vals[a] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    auto cond = ising_conditional_pmf(p, obs, vals);
    double total = 0;
    for (double q : cond.pmf) total += q;
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("degenerate and non-binary inputs are rejected") {
  Eigen::MatrixXd constant(3, 2);
  constant << 1, 0, 1, 1, 1, 0;  // first variable constant
  CHECK_THROWS_AS(fit_ising_weighted(constant, Eigen::VectorXd::Ones(3),
                                     {1, 2}, IsingOptions{}),
                  DegenerateFitError);

  DataMatrix cont = mmg_test::make_data(2, {{0, 1}, {1, 0}});
  auto g = mmg_test::chain_graph(2);
  CHECK_THROWS_AS(fit_ising(cont, Pattern::from_string("10"), g,
                            IsingOptions{}),
                  SchemaError);
}

TEST_SUITE_END();
