#include "mmg/submodels.hpp"

#include "mmg/errors.hpp"

namespace mmg {

std::string family_name(SubmodelFamily f) {
  switch (f) {
    case SubmodelFamily::Gaussian:
      return "gaussian";
    case SubmodelFamily::Ising:
      return "ising";
    case SubmodelFamily::MP:
      return "mp";
  }
  return "unknown";
}

SubmodelFamily family_from_name(const std::string& name) {
  if (name == "gaussian") return SubmodelFamily::Gaussian;
  if (name == "ising") return SubmodelFamily::Ising;
  if (name == "mp") return SubmodelFamily::MP;
  throw ConfigError("unknown submodel family \"" + name + "\"");
}

const std::vector<int>& submodel_scope(const SubmodelParams& p) {
  return std::visit([](const auto& v) -> const std::vector<int>& {
    return v.scope;
  }, p);
}

double submodel_nll(const SubmodelParams& p, const Eigen::VectorXd& x) {
  return std::visit([&](const auto& v) { return v.nll(x); }, p);
}

double empirical_risk(const SubmodelParams& p, const DataMatrix& d,
                      const ConnectedPattern& s, const UndirectedGraph& g) {
  const ModelPattern required = g.model_pattern_of(s);
  const auto rows = rows_at_least(d, required);
  const auto scope = submodel_scope(p);
  double acc = 0;
  for (int i : rows) acc += submodel_nll(p, d.row_at(i, scope));
  return d.rows() == 0 ? 0.0 : acc / d.rows();
}

}  // namespace mmg
