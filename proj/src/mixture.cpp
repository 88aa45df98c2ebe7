#include "mmg/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mmg/errors.hpp"

namespace mmg {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kCollapseTol = 1e-8;
constexpr double kProbClip = 1e-6;

double log_binom_coeff(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
         std::lgamma(n - k + 1.0);
}

}  // namespace

double UnivariateParam::log_density(double x) const {
  if (kind == Kind::Gaussian) {
    double z = x - mean;
    return -0.5 * (kLog2Pi + std::log(var) + z * z / var);
  }
  int k = static_cast<int>(std::lround(x));
  if (k < 0 || k > trials) return -std::numeric_limits<double>::infinity();
  return log_binom_coeff(trials, k) + k * std::log(prob) +
         (trials - k) * std::log1p(-prob);
}

double UnivariateParam::sample(RandomStream& rng) const {
  if (kind == Kind::Gaussian) return mean + std::sqrt(var) * rng.normal();
  int successes = 0;
  for (int t = 0; t < trials; ++t)
    if (rng.bernoulli(prob)) ++successes;
  return static_cast<double>(successes);
}

double MPParams::nll(const Eigen::VectorXd& x) const {
  const int K = k();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> lw(K);
  for (int c = 0; c < K; ++c) {
    double acc = std::log(weights[c]);
    for (std::size_t j = 0; j < scope.size(); ++j)
      acc += comps[c][j].log_density(x[static_cast<int>(j)]);
    lw[c] = acc;
    best = std::max(best, acc);
  }
  double s = 0;
  for (double v : lw) s += std::exp(v - best);
  return -(best + std::log(s));
}

namespace {

struct EmFit {
  MPParams params;
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  bool collapsed = false;
  int collapsed_component = -1;
};

std::vector<UnivariateParam> column_mle(const Eigen::MatrixXd& x,
                                        const std::vector<ColumnKind>& kinds,
                                        const std::vector<int>& maxes) {
  const int m = static_cast<int>(x.cols());
  const double n = static_cast<double>(x.rows());
  std::vector<UnivariateParam> out(m);
  for (int j = 0; j < m; ++j) {
    double mean = x.col(j).mean();
    if (kinds[j] == ColumnKind::Continuous) {
      out[j].kind = UnivariateParam::Kind::Gaussian;
      out[j].mean = mean;
      out[j].var =
          std::max((x.col(j).array() - mean).square().sum() / n, 1e-12);
    } else {
      out[j].kind = UnivariateParam::Kind::Binomial;
      out[j].trials = maxes[j];
      out[j].prob = std::clamp(mean / maxes[j], kProbClip, 1.0 - kProbClip);
    }
  }
  return out;
}

// One EM run from a k-means++-style seeding; throws nothing, reports
// collapse through the result.
EmFit run_em(const Eigen::MatrixXd& x, const std::vector<ColumnKind>& kinds,
             const std::vector<int>& maxes, const std::vector<int>& scope,
             int K, const MPOptions& opts, RandomStream rng) {
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(x.cols());

  EmFit fit;
  fit.params.scope = scope;
  fit.params.weights = Eigen::VectorXd::Constant(K, 1.0 / K);
  fit.params.comps.assign(K, column_mle(x, kinds, maxes));

  // Seed component centers by distance-weighted row picks.
  std::vector<int> centers;
  centers.push_back(static_cast<int>(rng.uniform_index(n)));
  while (static_cast<int>(centers.size()) < K) {
    std::vector<double> d2(n);
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int c : centers) best = std::min(best, (x.row(i) - x.row(c)).squaredNorm());
      d2[i] = best;
    }
    double total = 0;
    for (double v : d2) total += v;
    if (total <= 0) {
      centers.push_back(static_cast<int>(rng.uniform_index(n)));
      continue;
    }
    centers.push_back(rng.categorical(d2));
  }
  for (int c = 0; c < K; ++c)
    for (int j = 0; j < m; ++j) {
      auto& u = fit.params.comps[c][j];
      if (u.kind == UnivariateParam::Kind::Gaussian)
        u.mean = x(centers[c], j);
      else
        u.prob = std::clamp((x(centers[c], j) + 1.0) / (u.trials + 2.0),
                            kProbClip, 1.0 - kProbClip);
    }

  Eigen::MatrixXd gamma(n, K);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // E-step with log-space normalization.
    double ll = 0;
    for (int i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < K; ++c) {
        double acc = std::log(fit.params.weights[c]);
        for (int j = 0; j < m; ++j)
          acc += fit.params.comps[c][j].log_density(x(i, j));
        gamma(i, c) = acc;
        mx = std::max(mx, acc);
      }
      double s = 0;
      for (int c = 0; c < K; ++c) s += std::exp(gamma(i, c) - mx);
      double lse = mx + std::log(s);
      ll += lse;
      for (int c = 0; c < K; ++c)
        gamma(i, c) = std::exp(gamma(i, c) - lse);
    }
    fit.trace.push_back(ll);
    fit.loglik = ll;

    // M-step.
    for (int c = 0; c < K; ++c) {
      double gsum = gamma.col(c).sum();
      fit.params.weights[c] = gsum / n;
      if (fit.params.weights[c] < kCollapseTol) {
        fit.collapsed = true;
        fit.collapsed_component = c;
        return fit;
      }
      for (int j = 0; j < m; ++j) {
        auto& u = fit.params.comps[c][j];
        double wmean = gamma.col(c).dot(x.col(j)) / gsum;
        if (u.kind == UnivariateParam::Kind::Gaussian) {
          u.mean = wmean;
          double wvar =
              gamma.col(c).dot((x.col(j).array() - wmean).square().matrix()) /
              gsum;
          if (wvar < kCollapseTol) {
            fit.collapsed = true;
            fit.collapsed_component = c;
            return fit;
          }
          u.var = wvar;
        } else {
          u.prob = std::clamp(wmean / u.trials, kProbClip, 1.0 - kProbClip);
        }
      }
    }

    if (iter > 0 && ll - prev_ll < opts.tol) break;
    prev_ll = ll;
  }
  return fit;
}

}  // namespace

MPParams fit_mp_rows(const DataMatrix& d, const std::vector<int>& rows,
                     const std::vector<int>& scope, int K,
                     const MPOptions& opts, std::vector<double>* ll_trace,
                     std::vector<std::string>* warnings) {
  if (K < 1) throw std::invalid_argument("mixture needs K >= 1 components");
  if (rows.empty())
    throw NoSupportError("mixture fit has no qualifying rows");
  const int m = static_cast<int>(scope.size());
  Eigen::MatrixXd x(static_cast<int>(rows.size()), m);
  for (std::size_t i = 0; i < rows.size(); ++i)
    x.row(static_cast<int>(i)) = d.row_at(rows[i], scope).transpose();
  std::vector<ColumnKind> kinds(m);
  std::vector<int> maxes(m, 1);
  for (int j = 0; j < m; ++j) {
    const auto& col = d.columns()[scope[j] - 1];
    kinds[j] = col.kind;
    maxes[j] = col.kind == ColumnKind::Count ? col.count_max : 1;
  }

  int k_now = K;
  while (true) {
    EmFit best;
    bool collapsed = false;
    int collapsed_component = -1;
    for (int r = 0; r <= opts.restarts; ++r) {
      EmFit f = run_em(x, kinds, maxes, scope, k_now, opts,
                       RandomStream::derive(opts.seed, {static_cast<std::uint64_t>(r),
                                                        static_cast<std::uint64_t>(k_now)}));
      if (f.collapsed) {
        collapsed = true;
        collapsed_component = f.collapsed_component;
        continue;
      }
      if (f.loglik > best.loglik) best = std::move(f);
    }
    if (std::isfinite(best.loglik)) {
      if (ll_trace != nullptr) *ll_trace = best.trace;
      return best.params;
    }
    // Every restart collapsed; prune one component and refit.
    if (!collapsed) throw NumericalError("mixture fit failed unexpectedly");
    if (k_now - 1 < 1)
      throw NumericalError(
          "mixture fit collapsed at K=1; data cannot support the model");
    if (warnings != nullptr)
      warnings->push_back("mixture component " +
                          std::to_string(collapsed_component) +
                          " collapsed; refitting with K=" +
                          std::to_string(k_now - 1));
    --k_now;
  }
}

MPParams fit_mp_em(const DataMatrix& d, const ConnectedPattern& s,
                   const UndirectedGraph& g, int K, const MPOptions& opts,
                   std::vector<double>* ll_trace,
                   std::vector<std::string>* warnings) {
  const ModelPattern required = g.model_pattern_of(s);
  const auto rows = rows_at_least(d, required);
  if (rows.empty())
    throw NoSupportError("no rows observe model pattern " +
                         required.to_string());
  return fit_mp_rows(d, rows, required.indices(), K, opts, ll_trace, warnings);
}

Eigen::VectorXd mp_membership_weights(const MPParams& p,
                                      const std::vector<int>& observed,
                                      const Eigen::VectorXd& values) {
  const int K = p.k();
  std::vector<int> obs_pos;
  for (std::size_t a = 0; a < observed.size(); ++a) {
    auto it = std::find(p.scope.begin(), p.scope.end(), observed[a]);
    if (it == p.scope.end())
      throw std::invalid_argument(
          "mp_membership_weights: observed set not inside scope");
    obs_pos.push_back(static_cast<int>(it - p.scope.begin()));
  }
  Eigen::VectorXd logw(K);
  for (int c = 0; c < K; ++c) {
    double acc = std::log(p.weights[c]);
    for (std::size_t a = 0; a < obs_pos.size(); ++a)
      acc += p.comps[c][obs_pos[a]].log_density(values[static_cast<int>(a)]);
    logw[c] = acc;
  }
  double mx = logw.maxCoeff();
  if (!std::isfinite(mx))
    throw UnderflowError(
        "all mixture membership weights vanished for the observed values");
  Eigen::VectorXd w = (logw.array() - mx).exp();
  return w / w.sum();
}

Eigen::VectorXd mp_conditional_sample(const MPParams& p,
                                      const std::vector<int>& observed,
                                      const Eigen::VectorXd& values,
                                      RandomStream& rng,
                                      std::vector<int>* missing_out) {
  Eigen::VectorXd w = mp_membership_weights(p, observed, values);
  std::vector<double> wv(w.data(), w.data() + w.size());
  int kstar = rng.categorical(wv);

  std::vector<int> missing;
  for (std::size_t j = 0; j < p.scope.size(); ++j)
    if (std::find(observed.begin(), observed.end(), p.scope[j]) ==
        observed.end())
      missing.push_back(static_cast<int>(j));

  Eigen::VectorXd out(static_cast<int>(missing.size()));
  for (std::size_t a = 0; a < missing.size(); ++a)
    out[static_cast<int>(a)] = p.comps[kstar][missing[a]].sample(rng);
  if (missing_out != nullptr) {
    missing_out->clear();
    for (int j : missing) missing_out->push_back(p.scope[j]);
  }
  return out;
}

}  // namespace mmg
