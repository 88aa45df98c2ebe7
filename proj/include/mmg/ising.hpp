#ifndef MMG_ISING_HPP_
#define MMG_ISING_HPP_

#include <Eigen/Dense>
#include <vector>

#include "mmg/dataset.hpp"
#include "mmg/graph.hpp"
#include "mmg/pattern.hpp"

namespace mmg {

// Binary exponential family over the scope variables:
//   p(x) = exp(field.x + x' coupling x - log_partition),  x in {0,1}^m,
// with coupling symmetric and zero on the diagonal, so the pairwise term
// contributes 2*coupling(u,v)*x_u*x_v per edge.
struct IsingParams {
  std::vector<int> scope;  // 1-based variable indices, ascending
  Eigen::VectorXd field;
  Eigen::MatrixXd coupling;
  double log_partition = 0.0;

  double nll(const Eigen::VectorXd& x) const;
};

struct IsingOptions {
  int max_iter = 500;
  double tol = 1e-8;  // gradient infinity-norm
  double step = 1.0;  // initial ascent step, backtracked as needed
};

// Exact log partition function by 2^m enumeration; m <= 15.
double ising_log_partition(const Eigen::VectorXd& field,
                           const Eigen::MatrixXd& coupling);

// Average weighted log-likelihood and its gradient in (field, upper
// triangle of coupling) coordinates.  Exposed so the ascent direction can
// be validated against finite differences.
double ising_loglik(const Eigen::MatrixXd& x01, const Eigen::VectorXd& w,
                    const Eigen::VectorXd& field,
                    const Eigen::MatrixXd& coupling,
                    Eigen::VectorXd* grad = nullptr);

// Weighted MLE by gradient ascent with backtracking line search; the exact
// partition function keeps the objective concave.
IsingParams fit_ising_weighted(const Eigen::MatrixXd& x01,
                               const Eigen::VectorXd& w,
                               const std::vector<int>& scope,
                               const IsingOptions& opts);

// PAI fit: scope = closed neighborhood of s, rows = all observing it.
IsingParams fit_ising(const DataMatrix& d, const ConnectedPattern& s,
                      const UndirectedGraph& g, const IsingOptions& opts);

// Marginal fit over explicit rows/variables (fallback path).
IsingParams fit_ising_rows(const DataMatrix& d, const std::vector<int>& rows,
                           const std::vector<int>& scope,
                           const IsingOptions& opts);

struct IsingConditional {
  std::vector<int> missing;    // scope variables described, ascending
  std::vector<double> pmf;     // indexed by sum_k x_{missing[k]} << k
};

// Exact conditional PMF of the unconditioned scope variables given the
// observed ones; entries sum to 1.  |missing| <= 15.
IsingConditional ising_conditional_pmf(const IsingParams& p,
                                       const std::vector<int>& observed,
                                       const Eigen::VectorXd& values);

}  // namespace mmg

#endif  // MMG_ISING_HPP_
