#ifndef MMG_MIXTURE_HPP_
#define MMG_MIXTURE_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mmg/dataset.hpp"
#include "mmg/graph.hpp"
#include "mmg/pattern.hpp"
#include "mmg/rng.hpp"

namespace mmg {

// Univariate component law for one column of a mixture-of-products model.
struct UnivariateParam {
  enum class Kind { Gaussian, Binomial } kind = Kind::Gaussian;
  double mean = 0.0;      // Gaussian
  double var = 1.0;       // Gaussian
  int trials = 1;         // Binomial
  double prob = 0.5;      // Binomial

  double log_density(double x) const;
  double sample(RandomStream& rng) const;
};

// Mixture of products over the scope variables: each component is a
// product of univariate laws, one per column.
struct MPParams {
  std::vector<int> scope;  // 1-based variable indices, ascending
  Eigen::VectorXd weights;
  // comps[k][j] is the law of scope[j] under component k.
  std::vector<std::vector<UnivariateParam>> comps;

  int k() const { return static_cast<int>(weights.size()); }
  double nll(const Eigen::VectorXd& x) const;
};

struct MPOptions {
  int max_iter = 300;
  double tol = 1e-6;   // absolute log-likelihood improvement
  int restarts = 2;    // random restarts beyond the first
  std::uint64_t seed = 0;
};

// EM fit of a K-component mixture of products on explicit rows/variables.
// Components whose weight or (Gaussian) variance collapses are pruned and
// the fit restarts at K-1; ll_trace, when supplied, receives the
// observed-data log-likelihood after each EM iteration of the returned fit.
MPParams fit_mp_rows(const DataMatrix& d, const std::vector<int>& rows,
                     const std::vector<int>& scope, int K,
                     const MPOptions& opts,
                     std::vector<double>* ll_trace = nullptr,
                     std::vector<std::string>* warnings = nullptr);

// PAI fit: scope = closed neighborhood of s, rows = all observing it.
MPParams fit_mp_em(const DataMatrix& d, const ConnectedPattern& s,
                   const UndirectedGraph& g, int K, const MPOptions& opts,
                   std::vector<double>* ll_trace = nullptr,
                   std::vector<std::string>* warnings = nullptr);

// Draws the unconditioned scope variables given the observed ones:
// component weights w_k proportional to pi_k * prod_observed p(x_j), then
// one draw per missing column from the selected component.  Weights are
// computed in log space.
Eigen::VectorXd mp_conditional_sample(const MPParams& p,
                                      const std::vector<int>& observed,
                                      const Eigen::VectorXd& values,
                                      RandomStream& rng,
                                      std::vector<int>* missing_out = nullptr);

// Normalized component responsibilities given a subset of observed scope
// values (the weights of Algorithm step before sampling).
Eigen::VectorXd mp_membership_weights(const MPParams& p,
                                      const std::vector<int>& observed,
                                      const Eigen::VectorXd& values);

}  // namespace mmg

#endif  // MMG_MIXTURE_HPP_
