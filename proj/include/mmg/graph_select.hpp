#ifndef MMG_GRAPH_SELECT_HPP_
#define MMG_GRAPH_SELECT_HPP_

#include <Eigen/Dense>

#include "mmg/dataset.hpp"
#include "mmg/graph.hpp"

namespace mmg {

// Partial correlations from a covariance matrix: with K = cov^-1,
// rho(u,v) = -K(u,v) / sqrt(K(u,u) K(v,v)).
Eigen::MatrixXd partial_correlations(const Eigen::MatrixXd& cov);

// Working graph from complete cases: an edge wherever the absolute
// partial correlation exceeds the threshold.  Needs at least d + 2
// complete cases and an invertible sample covariance.
UndirectedGraph partial_corr_graph(const DataMatrix& d, double threshold);

}  // namespace mmg

#endif  // MMG_GRAPH_SELECT_HPP_
