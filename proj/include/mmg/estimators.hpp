#ifndef MMG_ESTIMATORS_HPP_
#define MMG_ESTIMATORS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmg/dataset.hpp"
#include "mmg/graph.hpp"
#include "mmg/pattern.hpp"

namespace mmg {

// Linear working model for the conditional mean of the target given the
// boundary of connected pattern s, fitted on rows observing the model
// pattern.
struct RegressionModel {
  ConnectedPattern s;
  std::vector<int> neighbors;  // 1-based, ascending; may be empty
  double intercept = 0;
  Eigen::VectorXd slopes;

  double predict(const Eigen::VectorXd& x) const {
    return intercept + slopes.dot(x);
  }
};

// Logistic working model for the pattern odds of s: membership in
// A = {rows whose missing component at the target is s} against
// B = {rows observing the model pattern}, as a function of the boundary.
struct OddsModel {
  ConnectedPattern s;
  std::vector<int> neighbors;
  double intercept = 0;
  Eigen::VectorXd slopes;
  bool separation = false;

  double prob(const Eigen::VectorXd& x) const;
  double odds(const Eigen::VectorXd& x) const {
    double p = prob(x);
    return p / (1.0 - p);
  }
};

struct ConfidenceInterval {
  double lo = 0;
  double hi = 0;
  double level = 0.95;
};

struct EstimatorReport {
  std::string method;
  double point = 0;
  std::optional<ConfidenceInterval> ci;
  std::map<std::string, int> n_used;
  std::vector<std::string> warnings;
  // Per-component diagnostics for ra/ipw/aipw.
  struct ComponentInfo {
    std::string s;
    int n_pattern = 0;   // rows with psi(missing) = s
    int n_model = 0;     // rows observing the model pattern
    double odds_min = 0;
    double odds_max = 0;
  };
  std::vector<ComponentInfo> components;

  std::string to_json() const;
};

using RegressionMap = std::map<Pattern, RegressionModel>;
using OddsMap = std::map<Pattern, OddsModel>;

RegressionModel fit_regression(const DataMatrix& d, const UndirectedGraph& g,
                               const ConnectedPattern& s, int target);

OddsModel fit_odds(const DataMatrix& d, const UndirectedGraph& g,
                   const ConnectedPattern& s, int target);

// Nuisances for every component occurring in the data for this target.
RegressionMap fit_all_regressions(const DataMatrix& d,
                                  const UndirectedGraph& g, int target);
OddsMap fit_all_odds(const DataMatrix& d, const UndirectedGraph& g,
                     int target);

// Mean of the target over complete cases.
EstimatorReport estimate_cc(const DataMatrix& d, int target);

// Regression adjustment: observed-target sum plus predicted means over
// rows whose missing component at the target is s_j.
EstimatorReport estimate_ra(const DataMatrix& d, const UndirectedGraph& g,
                            int target, const RegressionMap& regs);

// Inverse probability weighting with aggregated pattern odds.
EstimatorReport estimate_ipw(const DataMatrix& d, const UndirectedGraph& g,
                             int target, const OddsMap& odds);

// Augmented estimator built from the influence-function linear form;
// consistent when either nuisance map is correct.
EstimatorReport estimate_aipw(const DataMatrix& d, const UndirectedGraph& g,
                              int target, const RegressionMap& regs,
                              const OddsMap& odds);

// Percentile bootstrap over row resamples.  The estimator closure is
// invoked on each replicate (refitting nuisances is its responsibility);
// replicates that throw NoSupportError are skipped, and more than 10%
// failures aborts with ResamplingError.
ConfidenceInterval bootstrap(
    const std::function<double(const DataMatrix&)>& estimator,
    const DataMatrix& d, int B, double level, std::uint64_t seed);

}  // namespace mmg

#endif  // MMG_ESTIMATORS_HPP_
