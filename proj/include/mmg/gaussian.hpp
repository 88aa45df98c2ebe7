#ifndef MMG_GAUSSIAN_HPP_
#define MMG_GAUSSIAN_HPP_

#include <Eigen/Dense>
#include <vector>

#include "mmg/dataset.hpp"
#include "mmg/graph.hpp"
#include "mmg/pattern.hpp"
#include "mmg/rng.hpp"

namespace mmg {

// Joint Gaussian over the scope variables of one connected pattern.
// mean/cov are maximum-likelihood moments of the qualifying rows
// (covariance divides by n, not n-1).
struct GaussianParams {
  std::vector<int> scope;  // 1-based variable indices, ascending
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  bool cov_singular = false;  // diagnostic; conditionals may fail later

  double nll(const Eigen::VectorXd& x) const;  // negative log density
};

// Fits the scope = closed neighborhood of s on all rows observing it.
// Requires at least |scope| + 1 qualifying rows.
GaussianParams fit_gaussian(const DataMatrix& d, const ConnectedPattern& s,
                            const UndirectedGraph& g);

// Moment fit over explicit rows and variables (used by fit_gaussian and by
// the marginal-fallback path).
GaussianParams fit_gaussian_rows(const DataMatrix& d,
                                 const std::vector<int>& rows,
                                 const std::vector<int>& scope);

struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::vector<int> missing;  // scope variables being described, ascending
};

// Conditional law of the unconditioned scope variables given the observed
// ones, by Schur complement.  `observed` must be a strict subset of the
// scope (possibly empty, giving the marginal).  Throws SingularityError if
// the conditioning block has a scaled pivot below 1e-10.
GaussianConditional gaussian_conditional(const GaussianParams& p,
                                         const std::vector<int>& observed,
                                         const Eigen::VectorXd& values);

// Draw from N(mean, cov); cov may be singular (PSD square root via LDLT
// with negative pivots clamped to zero).
Eigen::VectorXd gaussian_draw(const Eigen::VectorXd& mean,
                              const Eigen::MatrixXd& cov, RandomStream& rng);

}  // namespace mmg

#endif  // MMG_GAUSSIAN_HPP_
