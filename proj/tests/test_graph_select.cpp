#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mmg/errors.hpp"
#include "mmg/graph_select.hpp"
#include "mmg/rng.hpp"
#include "mmg/sim.hpp"
#include "support/test_util.hpp"

using namespace mmg;
using mmg_test::NA;

namespace {

Eigen::MatrixXd omega1() {
  Eigen::MatrixXd o(5, 5);
  o << 1, 0.6, 0.3, 0, 0,
       0.6, 1, 0.4, 0.3, 0,
       0.3, 0.4, 1, 0, 0,
       0, 0.3, 0, 1, 0.9,
       0, 0, 0, 0.9, 1;
  return o;
}

}  // namespace

TEST_SUITE_BEGIN("graph_select");

TEST_CASE("orthogonal design yields an empty graph") {
  DataMatrix d = mmg_test::make_data(2, {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}});
  UndirectedGraph g = partial_corr_graph(d, 0.05);
  CHECK(g.edges().empty());
}

TEST_CASE("population partial correlations of the design precision") {
  // Direct check of the formula against a regression-residual oracle.
  Eigen::MatrixXd omega = omega1();
  Eigen::MatrixXd sigma = omega.inverse();
  Eigen::MatrixXd rho = partial_correlations(sigma);
  // Partial correlation of (u,v) given the rest = correlation of the
  // regression residuals of u and v on the remaining variables.
  const int p = 5;
  for (int u = 0; u < p; ++u)
    for (int v = u + 1; v < p; ++v) {
      std::vector<int> rest;
      for (int k = 0; k < p; ++k)
        if (k != u && k != v) rest.push_back(k);
      Eigen::MatrixXd srr(3, 3);
      Eigen::VectorXd sur(3), svr(3);
      for (int a = 0; a < 3; ++a) {
        sur[a] = sigma(u, rest[a]);
        svr[a] = sigma(v, rest[a]);
        for (int b = 0; b < 3; ++b) srr(a, b) = sigma(rest[a], rest[b]);
      }
      Eigen::VectorXd bu = srr.ldlt().solve(sur);
      Eigen::VectorXd bv = srr.ldlt().solve(svr);
      double ruu = sigma(u, u) - sur.dot(bu);
      double rvv = sigma(v, v) - svr.dot(bv);
      double ruv = sigma(u, v) - sur.dot(bv);
      double oracle = ruv / std::sqrt(ruu * rvv);
      CHECK(rho(u, v) == doctest::Approx(oracle).epsilon(1e-10));
    }
  // The nonzero pattern of omega1 is exactly the example-graph edge set.
  for (int u = 0; u < p; ++u)
    for (int v = u + 1; v < p; ++v) {
      bool expect_edge = omega(u, v) != 0.0;
      CHECK((std::abs(rho(u, v)) > 0.15) == expect_edge);
    }
}

TEST_CASE("threshold 0.15 recovers the design support at n=5000") {
  RandomStream rng(606);
  DataMatrix d = sample_ggm(omega1(), Eigen::VectorXd::Constant(5, 1.5), 5000,
                            rng);
  UndirectedGraph g = partial_corr_graph(d, 0.15);
  CHECK(g.edges() == mmg_test::example_graph().edges());
}

TEST_CASE("edges shrink monotonically in the threshold") {
  RandomStream rng(607);
  DataMatrix d = sample_ggm(omega1(), Eigen::VectorXd::Constant(5, 1.5), 800,
                            rng);
  double prev_threshold = 0.0;
  auto prev = partial_corr_graph(d, prev_threshold).edges();
  for (double t : {0.05, 0.15, 0.35, 0.7}) {
    auto cur = partial_corr_graph(d, t).edges();
    for (const auto& e : cur)
      CHECK(std::find(prev.begin(), prev.end(), e) != prev.end());
    prev = cur;
  }
}

TEST_CASE("threshold zero keeps every nonzero partial correlation") {
  RandomStream rng(608);
  DataMatrix d = sample_ggm(Eigen::MatrixXd::Identity(3, 3),
                            Eigen::VectorXd::Zero(3), 100, rng);
  // Finite-sample partial correlations are almost surely nonzero.
  UndirectedGraph g = partial_corr_graph(d, 0.0);
  CHECK(g.edges().size() == 3);
}

TEST_CASE("failure modes: few complete cases and singular covariance") {
  DataMatrix tiny = mmg_test::make_data(3, {{1, 2, 3}, {2, 3, 4},
                                            {NA, 1, 1}, {3, 1, 2}});
  CHECK_THROWS_AS(partial_corr_graph(tiny, 0.1), NoSupportError);

  // Second column duplicates the first: singular covariance.
  DataMatrix dup = mmg_test::make_data(
      2, {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}});
  CHECK_THROWS_AS(partial_corr_graph(dup, 0.1), SingularityError);

  CHECK_THROWS_AS(partial_corr_graph(tiny, -0.5), std::invalid_argument);
}

TEST_SUITE_END();
