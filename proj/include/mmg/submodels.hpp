#ifndef MMG_SUBMODELS_HPP_
#define MMG_SUBMODELS_HPP_

#include <string>
#include <variant>

#include "mmg/dataset.hpp"
#include "mmg/gaussian.hpp"
#include "mmg/graph.hpp"
#include "mmg/ising.hpp"
#include "mmg/mixture.hpp"

namespace mmg {

enum class SubmodelFamily { Gaussian, Ising, MP };

std::string family_name(SubmodelFamily f);
SubmodelFamily family_from_name(const std::string& name);

using SubmodelParams = std::variant<GaussianParams, IsingParams, MPParams>;

const std::vector<int>& submodel_scope(const SubmodelParams& p);

// Negative log-likelihood of one row restricted to the submodel scope.
double submodel_nll(const SubmodelParams& p, const Eigen::VectorXd& x);

// Empirical imputation risk of a fitted (or candidate) submodel: the mean
// over ALL n rows of the negative log-likelihood times the indicator that
// the row observes the model pattern.  Rescaling by n rather than by the
// qualifying-row count leaves the minimizer unchanged.
double empirical_risk(const SubmodelParams& p, const DataMatrix& d,
                      const ConnectedPattern& s, const UndirectedGraph& g);

}  // namespace mmg

#endif  // MMG_SUBMODELS_HPP_
