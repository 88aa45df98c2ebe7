#include "mmg/graph_select.hpp"

#include <cmath>

#include "mmg/errors.hpp"

namespace mmg {

Eigen::MatrixXd partial_correlations(const Eigen::MatrixXd& cov) {
  const int d = static_cast<int>(cov.rows());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  double scale = std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success ||
      ldlt.vectorD().minCoeff() < 1e-10 * scale)
    throw SingularityError("sample covariance is singular");
  Eigen::MatrixXd precision =
      ldlt.solve(Eigen::MatrixXd::Identity(d, d));
  Eigen::MatrixXd rho(d, d);
  for (int u = 0; u < d; ++u)
    for (int v = 0; v < d; ++v)
      rho(u, v) = u == v ? 1.0
                         : -precision(u, v) /
                               std::sqrt(precision(u, u) * precision(v, v));
  return rho;
}

UndirectedGraph partial_corr_graph(const DataMatrix& d, double threshold) {
  if (threshold < 0)
    throw std::invalid_argument("threshold must be nonnegative");
  std::vector<int> cc;
  for (int i = 0; i < d.rows(); ++i)
    if (d.row_pattern(i).all()) cc.push_back(i);
  const int p = d.cols();
  if (static_cast<int>(cc.size()) < p + 2)
    throw NoSupportError("graph estimation needs at least " +
                         std::to_string(p + 2) + " complete cases, found " +
                         std::to_string(cc.size()));
  Eigen::MatrixXd x(static_cast<int>(cc.size()), p);
  for (std::size_t i = 0; i < cc.size(); ++i)
    for (int j = 0; j < p; ++j)
      x(static_cast<int>(i), j) = d.value(cc[i], j + 1);
  Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(cc.size());
  Eigen::MatrixXd rho = partial_correlations(cov);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < p; ++u)
    for (int v = u + 1; v < p; ++v)
      if (std::abs(rho(u, v)) > threshold) edges.emplace_back(u + 1, v + 1);
  return UndirectedGraph(p, std::move(edges));
}

}  // namespace mmg
