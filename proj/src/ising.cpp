#include "mmg/ising.hpp"

#include <algorithm>
#include <cmath>

#include "mmg/errors.hpp"

namespace mmg {

namespace {

constexpr int kMaxExactScope = 15;

double logsumexp(const std::vector<double>& v) {
  double mx = *std::max_element(v.begin(), v.end());
  double acc = 0;
  for (double x : v) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

// Energy of configuration mask b under (field, coupling).
double config_energy(std::uint32_t b, const Eigen::VectorXd& field,
                     const Eigen::MatrixXd& coupling) {
  const int m = static_cast<int>(field.size());
  double e = 0;
  for (int u = 0; u < m; ++u) {
    if (!((b >> u) & 1u)) continue;
    e += field[u];
    for (int v = u + 1; v < m; ++v)
      if ((b >> v) & 1u) e += 2.0 * coupling(u, v);
  }
  return e;
}

int upper_size(int m) { return m * (m - 1) / 2; }

void unpack(const Eigen::VectorXd& eta, int m, Eigen::VectorXd& field,
            Eigen::MatrixXd& coupling) {
  field = eta.head(m);
  coupling = Eigen::MatrixXd::Zero(m, m);
  int k = m;
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v) {
      coupling(u, v) = coupling(v, u) = eta[k];
      ++k;
    }
}

// Sufficient statistics of a configuration in (field, upper coupling)
// coordinates: (x_1..x_m, 2 x_u x_v for u < v).
Eigen::VectorXd config_stats(std::uint32_t b, int m) {
  Eigen::VectorXd t(m + upper_size(m));
  for (int j = 0; j < m; ++j) t[j] = (b >> j) & 1u;
  int k = m;
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v) {
      t[k] = 2.0 * t[u] * t[v];
      ++k;
    }
  return t;
}

// Model covariance of the sufficient statistics (the negated Hessian of
// the average log-likelihood).
Eigen::MatrixXd ising_suffstat_cov(const Eigen::VectorXd& field,
                                   const Eigen::MatrixXd& coupling) {
  const int m = static_cast<int>(field.size());
  const int dim = m + upper_size(m);
  std::vector<double> energies(1u << m);
  for (std::uint32_t b = 0; b < (1u << m); ++b)
    energies[b] = config_energy(b, field, coupling);
  double logz = logsumexp(energies);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(dim, dim);
  for (std::uint32_t b = 0; b < (1u << m); ++b) {
    double p = std::exp(energies[b] - logz);
    Eigen::VectorXd t = config_stats(b, m);
    mean += p * t;
    second += p * (t * t.transpose());
  }
  return second - mean * mean.transpose();
}

}  // namespace

double ising_log_partition(const Eigen::VectorXd& field,
                           const Eigen::MatrixXd& coupling) {
  const int m = static_cast<int>(field.size());
  if (m > kMaxExactScope)
    throw std::invalid_argument("ising scope " + std::to_string(m) +
                                " exceeds exact-enumeration bound " +
                                std::to_string(kMaxExactScope));
  std::vector<double> energies;
  energies.reserve(1u << m);
  for (std::uint32_t b = 0; b < (1u << m); ++b)
    energies.push_back(config_energy(b, field, coupling));
  return logsumexp(energies);
}

double IsingParams::nll(const Eigen::VectorXd& x) const {
  const int m = static_cast<int>(scope.size());
  double e = 0;
  for (int u = 0; u < m; ++u) {
    e += field[u] * x[u];
    for (int v = u + 1; v < m; ++v) e += 2.0 * coupling(u, v) * x[u] * x[v];
  }
  return log_partition - e;
}

double ising_loglik(const Eigen::MatrixXd& x01, const Eigen::VectorXd& w,
                    const Eigen::VectorXd& field,
                    const Eigen::MatrixXd& coupling, Eigen::VectorXd* grad) {
  const int m = static_cast<int>(field.size());
  const double wsum = w.sum();

  // Data moments of the sufficient statistics.
  Eigen::VectorXd mean1 = (x01.transpose() * w) / wsum;
  Eigen::MatrixXd mean2 =
      (x01.transpose() * w.asDiagonal() * x01) / wsum;

  // Model moments by exact enumeration.
  std::vector<double> energies(1u << m);
  for (std::uint32_t b = 0; b < (1u << m); ++b)
    energies[b] = config_energy(b, field, coupling);
  double logz = logsumexp(energies);

  Eigen::VectorXd model1 = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd model2 = Eigen::MatrixXd::Zero(m, m);
  for (std::uint32_t b = 0; b < (1u << m); ++b) {
    double p = std::exp(energies[b] - logz);
    for (int u = 0; u < m; ++u) {
      if (!((b >> u) & 1u)) continue;
      model1[u] += p;
      for (int v = u + 1; v < m; ++v)
        if ((b >> v) & 1u) model2(u, v) += p;
    }
  }

  if (grad != nullptr) {
    grad->resize(m + upper_size(m));
    grad->head(m) = mean1 - model1;
    int k = m;
    for (int u = 0; u < m; ++u)
      for (int v = u + 1; v < m; ++v) {
        (*grad)[k] = 2.0 * (mean2(u, v) - model2(u, v));
        ++k;
      }
  }

  double ll = field.dot(mean1) - logz;
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v) ll += 2.0 * coupling(u, v) * mean2(u, v);
  return ll;
}

IsingParams fit_ising_weighted(const Eigen::MatrixXd& x01,
                               const Eigen::VectorXd& w,
                               const std::vector<int>& scope,
                               const IsingOptions& opts) {
  const int m = static_cast<int>(x01.cols());
  if (m > kMaxExactScope)
    throw std::invalid_argument("ising scope " + std::to_string(m) +
                                " exceeds exact-enumeration bound " +
                                std::to_string(kMaxExactScope));
  if (x01.rows() == 0 || w.sum() <= 0)
    throw NoSupportError("ising fit has no qualifying rows");
  for (int i = 0; i < x01.rows(); ++i)
    for (int j = 0; j < m; ++j)
      if (x01(i, j) != 0.0 && x01(i, j) != 1.0)
        throw SchemaError("ising fit expects 0/1 data, got " +
                          std::to_string(x01(i, j)));

  // A variable constant in sample has no finite MLE.
  Eigen::VectorXd mean1 = (x01.transpose() * w) / w.sum();
  for (int j = 0; j < m; ++j)
    if (mean1[j] <= 0.0 || mean1[j] >= 1.0)
      throw DegenerateFitError(
          "ising fit degenerate: variable " +
          std::to_string(scope.empty() ? j + 1 : scope[j]) +
          " is constant in the qualifying rows");

  const int dim = m + upper_size(m);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd field;
  Eigen::MatrixXd coupling;
  Eigen::VectorXd grad;
  unpack(eta, m, field, coupling);
  double ll = ising_loglik(x01, w, field, coupling, &grad);

  // Damped Newton ascent: the negative Hessian is the model covariance of
  // the sufficient statistics, available exactly from the enumeration.
  double gnorm = grad.lpNorm<Eigen::Infinity>();
  int iter = 0;
  for (; iter < opts.max_iter && gnorm >= opts.tol; ++iter) {
    Eigen::MatrixXd stat_cov = ising_suffstat_cov(field, coupling);
    stat_cov.diagonal().array() += 1e-12;
    Eigen::VectorXd direction = stat_cov.ldlt().solve(grad);
    double step = opts.step;
    bool moved = false;
    while (step >= 1e-14) {
      Eigen::VectorXd trial = eta + step * direction;
      Eigen::VectorXd tf;
      Eigen::MatrixXd tc;
      unpack(trial, m, tf, tc);
      double tll = ising_loglik(x01, w, tf, tc, nullptr);
      if (tll >= ll - 1e-12 * (1.0 + std::abs(ll))) {
        eta = trial;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved)
      throw ConvergenceError("ising line search stalled at gradient norm " +
                             std::to_string(gnorm));
    unpack(eta, m, field, coupling);
    ll = ising_loglik(x01, w, field, coupling, &grad);
    gnorm = grad.lpNorm<Eigen::Infinity>();
  }
  if (gnorm >= opts.tol)
    throw ConvergenceError("ising fit did not converge in " +
                           std::to_string(opts.max_iter) +
                           " iterations; gradient norm " +
                           std::to_string(gnorm));

  IsingParams p;
  p.scope = scope;
  p.field = field;
  p.coupling = coupling;
  p.log_partition = ising_log_partition(field, coupling);
  return p;
}

IsingParams fit_ising_rows(const DataMatrix& d, const std::vector<int>& rows,
                           const std::vector<int>& scope,
                           const IsingOptions& opts) {
  for (int v : scope)
    if (d.columns()[v - 1].kind != ColumnKind::Binary)
      throw SchemaError("ising fit requires binary columns; column \"" +
                        d.columns()[v - 1].name + "\" is not binary");
  if (rows.empty())
    throw NoSupportError("ising fit has no qualifying rows");
  Eigen::MatrixXd x(static_cast<int>(rows.size()),
                    static_cast<int>(scope.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    x.row(static_cast<int>(i)) = d.row_at(rows[i], scope).transpose();
  return fit_ising_weighted(
      x, Eigen::VectorXd::Ones(static_cast<int>(rows.size())), scope, opts);
}

IsingParams fit_ising(const DataMatrix& d, const ConnectedPattern& s,
                      const UndirectedGraph& g, const IsingOptions& opts) {
  const ModelPattern required = g.model_pattern_of(s);
  const auto rows = rows_at_least(d, required);
  if (rows.empty())
    throw NoSupportError("no rows observe model pattern " +
                         required.to_string());
  return fit_ising_rows(d, rows, required.indices(), opts);
}

IsingConditional ising_conditional_pmf(const IsingParams& p,
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
        "ising_conditional_pmf: observed set not inside scope");
  const int q = static_cast<int>(mis_pos.size());
  if (q > kMaxExactScope)
    throw std::invalid_argument("ising conditional over " +
                                std::to_string(q) +
                                " variables exceeds enumeration bound");

  IsingConditional out;
  for (int k : mis_pos) out.missing.push_back(p.scope[k]);
  if (q == 0) {
    out.pmf = {1.0};
    return out;
  }

  Eigen::VectorXd xobs(obs_pos.size());
  for (std::size_t a = 0; a < obs_pos.size(); ++a) {
    auto it = std::find(observed.begin(), observed.end(), p.scope[obs_pos[a]]);
    xobs[static_cast<int>(a)] = values[static_cast<int>(it - observed.begin())];
  }

  std::vector<double> logw(1u << q);
  for (std::uint32_t b = 0; b < (1u << q); ++b) {
    double e = 0;
    for (int a = 0; a < q; ++a) {
      if (!((b >> a) & 1u)) continue;
      const int u = mis_pos[a];
      e += p.field[u];
      for (int bb = a + 1; bb < q; ++bb)
        if ((b >> bb) & 1u) e += 2.0 * p.coupling(u, mis_pos[bb]);
      for (std::size_t c = 0; c < obs_pos.size(); ++c)
        e += 2.0 * p.coupling(u, obs_pos[c]) * xobs[static_cast<int>(c)];
    }
    logw[b] = e;
  }
  double lz = logsumexp(logw);
  out.pmf.resize(logw.size());
  double total = 0;
  for (std::size_t b = 0; b < logw.size(); ++b) {
    out.pmf[b] = std::exp(logw[b] - lz);
    total += out.pmf[b];
  }
  for (double& v : out.pmf) v /= total;
  return out;
}

}  // namespace mmg
