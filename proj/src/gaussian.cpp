#include "mmg/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include "mmg/errors.hpp"

namespace mmg {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kLog2Pi = 1.8378770664093454836;

std::string index_list(const std::vector<int>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

}  // namespace

double GaussianParams::nll(const Eigen::VectorXd& x) const {
  const int m = static_cast<int>(scope.size());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  Eigen::VectorXd diff = x - mean;
  double quad = diff.dot(ldlt.solve(diff));
  double logdet = 0;
  for (int i = 0; i < m; ++i) logdet += std::log(ldlt.vectorD()[i]);
  return 0.5 * (m * kLog2Pi + logdet + quad);
}

GaussianParams fit_gaussian_rows(const DataMatrix& d,
                                 const std::vector<int>& rows,
                                 const std::vector<int>& scope) {
  const int m = static_cast<int>(scope.size());
  const int n = static_cast<int>(rows.size());
  if (n < 1)
    throw NoSupportError("gaussian fit over variables " + index_list(scope) +
                         " has no rows");
  Eigen::MatrixXd x(n, m);
  for (int i = 0; i < n; ++i) x.row(i) = d.row_at(rows[i], scope).transpose();
  GaussianParams p;
  p.scope = scope;
  p.mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - p.mean.transpose();
  p.cov = (centered.transpose() * centered) / static_cast<double>(n);
  p.cov = 0.5 * (p.cov + p.cov.transpose()).eval();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(p.cov);
  double dmax = p.cov.diagonal().maxCoeff();
  p.cov_singular = ldlt.info() != Eigen::Success ||
                   ldlt.vectorD().minCoeff() < kPivotTol * std::max(1.0, dmax);
  return p;
}

GaussianParams fit_gaussian(const DataMatrix& d, const ConnectedPattern& s,
                            const UndirectedGraph& g) {
  const ModelPattern required = g.model_pattern_of(s);
  const auto rows = rows_at_least(d, required);
  if (static_cast<int>(rows.size()) < required.count() + 1)
    throw NoSupportError(
        "insufficient rows for model pattern " + required.to_string() + " (" +
        std::to_string(rows.size()) + " rows for " +
        std::to_string(required.count()) + " variables)");
  return fit_gaussian_rows(d, rows, required.indices());
}

GaussianConditional gaussian_conditional(const GaussianParams& p,
                                         const std::vector<int>& observed,
                                         const Eigen::VectorXd& values) {
  const int m = static_cast<int>(p.scope.size());
  std::vector<int> obs_pos, mis_pos;
  for (int k = 0; k < m; ++k) {
    bool is_obs =
        std::find(observed.begin(), observed.end(), p.scope[k]) !=
        observed.end();
    (is_obs ? obs_pos : mis_pos).push_back(k);
  }
  if (obs_pos.size() != observed.size())
    throw std::invalid_argument(
        "gaussian_conditional: observed set not inside scope " +
        index_list(p.scope));
  if (static_cast<int>(values.size()) != static_cast<int>(obs_pos.size()))
    throw std::invalid_argument(
        "gaussian_conditional: value count does not match observed set");

  GaussianConditional out;
  for (int k : mis_pos) out.missing.push_back(p.scope[k]);
  const int q = static_cast<int>(mis_pos.size());
  const int c = static_cast<int>(obs_pos.size());
  if (c == 0) {
    out.mean = p.mean;
    out.cov = p.cov;
    return out;
  }

  Eigen::MatrixXd s11(q, q), s12(q, c), s22(c, c);
  Eigen::VectorXd mu1(q), mu2(c), x2(c);
  for (int a = 0; a < q; ++a) {
    mu1[a] = p.mean[mis_pos[a]];
    for (int b = 0; b < q; ++b) s11(a, b) = p.cov(mis_pos[a], mis_pos[b]);
    for (int b = 0; b < c; ++b) s12(a, b) = p.cov(mis_pos[a], obs_pos[b]);
  }
  std::vector<int> obs_vars;
  for (int a = 0; a < c; ++a) {
    mu2[a] = p.mean[obs_pos[a]];
    obs_vars.push_back(p.scope[obs_pos[a]]);
    // `values` is ordered like `observed`; re-order to scope order.
    auto it = std::find(observed.begin(), observed.end(), p.scope[obs_pos[a]]);
    x2[a] = values[static_cast<int>(it - observed.begin())];
    for (int b = 0; b < c; ++b) s22(a, b) = p.cov(obs_pos[a], obs_pos[b]);
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(s22);
  double scale = std::max(1.0, s22.diagonal().cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success ||
      ldlt.vectorD().minCoeff() < kPivotTol * scale)
    throw SingularityError("singular conditioning block over variables " +
                           index_list(obs_vars));

  Eigen::MatrixXd rt = ldlt.solve(s12.transpose());  // S22^-1 S21
  out.mean = mu1 + rt.transpose() * (x2 - mu2);
  Eigen::MatrixXd cc = s11 - s12 * rt;
  out.cov = 0.5 * (cc + cc.transpose());
  if (q == 0) {
    out.mean.resize(0);
    out.cov.resize(0, 0);
  }
  return out;
}

Eigen::VectorXd gaussian_draw(const Eigen::VectorXd& mean,
                              const Eigen::MatrixXd& cov, RandomStream& rng) {
  const int m = static_cast<int>(mean.size());
  if (m == 0) return mean;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  Eigen::VectorXd z(m);
  for (int i = 0; i < m; ++i) z[i] = rng.normal();
  Eigen::VectorXd dsqrt =
      ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  // x = mean + P^T L D^{1/2} z  reproduces cov = P^T L D L^T P.
  Eigen::VectorXd y = dsqrt.asDiagonal() * z;
  y = ldlt.matrixL() * y;
  return mean + ldlt.transpositionsP().transpose() * y;
}

}  // namespace mmg
