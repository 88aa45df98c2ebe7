#include "mmg/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "mmg/errors.hpp"
#include "mmg/rng.hpp"

namespace mmg {

namespace {

constexpr double kProbClip = 1e-6;
constexpr double kSeparationLP = 30.0;  // |linear predictor| flag threshold

double expit(double t) {
  if (t >= 0) {
    double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(t);
  return e / (1.0 + e);
}

// Rows whose missing set has component s at the target, i.e. the rows the
// submodel for s would impute.
std::vector<int> rows_with_component(const DataMatrix& d,
                                     const UndirectedGraph& g,
                                     const ConnectedPattern& s, int target) {
  std::vector<int> out;
  for (int i = 0; i < d.rows(); ++i) {
    const auto& r = d.row_pattern(i);
    if (r.test(target)) continue;
    if (g.psi(r.complement(), target) == s) out.push_back(i);
  }
  return out;
}

std::vector<ResponsePattern> data_patterns(const DataMatrix& d) {
  return pattern_table(d).patterns();
}

}  // namespace

double OddsModel::prob(const Eigen::VectorXd& x) const {
  double p = expit(intercept + slopes.dot(x));
  return std::clamp(p, kProbClip, 1.0 - kProbClip);
}

std::string EstimatorReport::to_json() const {
  nlohmann::json j;
  j["method"] = method;
  j["point"] = point;
  if (ci.has_value())
    j["ci"] = {{"lo", ci->lo}, {"hi", ci->hi}, {"level", ci->level}};
  j["n_used"] = n_used;
  j["warnings"] = warnings;
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : components)
    comps.push_back({{"s", c.s},
                     {"n_pattern", c.n_pattern},
                     {"n_model", c.n_model},
                     {"odds_min", c.odds_min},
                     {"odds_max", c.odds_max}});
  j["components"] = comps;
  return j.dump(2);
}

RegressionModel fit_regression(const DataMatrix& d, const UndirectedGraph& g,
                               const ConnectedPattern& s, int target) {
  if (!s.test(target))
    throw std::invalid_argument("fit_regression: target " +
                                std::to_string(target) +
                                " not inside connected pattern " +
                                s.to_string());
  const ModelPattern required = g.model_pattern_of(s);
  const std::vector<int> nb = g.neighbors(s).indices();
  const auto rows = rows_at_least(d, required);
  const int p = static_cast<int>(nb.size());
  if (static_cast<int>(rows.size()) < p + 2)
    throw NoSupportError("regression for component " + s.to_string() +
                         " needs at least " + std::to_string(p + 2) +
                         " rows observing " + required.to_string() +
                         ", found " + std::to_string(rows.size()));

  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd x(n, p + 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x.block(i, 1, 1, p) = d.row_at(rows[i], nb).transpose();
    y[i] = d.value(rows[i], target);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p + 1)
    throw SingularityError("rank-deficient design for component " +
                           s.to_string() + " over neighbors of size " +
                           std::to_string(p));
  Eigen::VectorXd beta = qr.solve(y);

  RegressionModel m;
  m.s = s;
  m.neighbors = nb;
  m.intercept = beta[0];
  m.slopes = beta.tail(p);
  return m;
}

OddsModel fit_odds(const DataMatrix& d, const UndirectedGraph& g,
                   const ConnectedPattern& s, int target) {
  if (!s.test(target))
    throw std::invalid_argument("fit_odds: target not inside pattern");
  const ModelPattern required = g.model_pattern_of(s);
  const std::vector<int> nb = g.neighbors(s).indices();
  const auto a_rows = rows_with_component(d, g, s, target);
  const auto b_rows = rows_at_least(d, required);
  if (a_rows.empty() || b_rows.empty())
    throw NoSupportError("odds for component " + s.to_string() +
                         " needs both event groups nonempty (pattern rows: " +
                         std::to_string(a_rows.size()) + ", model rows: " +
                         std::to_string(b_rows.size()) + ")");
  // A rows miss the target while B rows observe it, so the two groups
  // cannot overlap.
  for (int i : a_rows)
    if (d.row_pattern(i).contains(required))
      throw std::logic_error("odds groups overlap; component invariant broken");

  const int p = static_cast<int>(nb.size());
  const int n = static_cast<int>(a_rows.size() + b_rows.size());
  Eigen::MatrixXd x(n, p + 1);
  Eigen::VectorXd y(n);
  int row = 0;
  for (int i : a_rows) {
    x(row, 0) = 1.0;
    x.block(row, 1, 1, p) = d.row_at(i, nb).transpose();
    y[row++] = 1.0;
  }
  for (int i : b_rows) {
    x(row, 0) = 1.0;
    x.block(row, 1, 1, p) = d.row_at(i, nb).transpose();
    y[row++] = 0.0;
  }

  // Newton-Raphson with step halving.  The gradient criterion scales with
  // the row count (the objective is a sum, not an average).
  const double grad_tol = 1e-8 * std::max(1.0, static_cast<double>(n));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  auto negll = [&](const Eigen::VectorXd& b) {
    double acc = 0;
    for (int i = 0; i < n; ++i) {
      double t = x.row(i).dot(b);
      // log(1 + exp(t)) - y t, computed stably
      acc += (t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t))) -
             y[i] * t;
    }
    return acc;
  };
  double f = negll(beta);
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd mu(n), w(n);
    for (int i = 0; i < n; ++i) {
      mu[i] = expit(x.row(i).dot(beta));
      w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
    }
    Eigen::VectorXd grad = x.transpose() * (mu - y);
    if (grad.lpNorm<Eigen::Infinity>() < grad_tol) {
      converged = true;
      break;
    }
    Eigen::MatrixXd hess = x.transpose() * w.asDiagonal() * x;
    Eigen::VectorXd step = hess.ldlt().solve(grad);
    double t = 1.0;
    bool moved = false;
    while (t > 1e-10) {
      double trial = negll(beta - t * step);
      if (trial <= f + 1e-12 * (1.0 + std::abs(f))) {
        beta -= t * step;
        f = trial;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;  // rounding floor; the gradient check decides
  }

  OddsModel m;
  m.s = s;
  m.neighbors = nb;
  m.intercept = beta[0];
  m.slopes = beta.tail(p);
  if (!converged) m.separation = true;
  for (int i = 0; i < n && !m.separation; ++i)
    if (std::abs(x.row(i).dot(beta)) > kSeparationLP) m.separation = true;
  return m;
}

RegressionMap fit_all_regressions(const DataMatrix& d,
                                  const UndirectedGraph& g, int target) {
  RegressionMap out;
  for (const auto& s : occurring_components(g, data_patterns(d), target))
    out.emplace(s, fit_regression(d, g, s, target));
  return out;
}

OddsMap fit_all_odds(const DataMatrix& d, const UndirectedGraph& g,
                     int target) {
  OddsMap out;
  for (const auto& s : occurring_components(g, data_patterns(d), target))
    out.emplace(s, fit_odds(d, g, s, target));
  return out;
}

EstimatorReport estimate_cc(const DataMatrix& d, int target) {
  double acc = 0;
  int n_cc = 0;
  for (int i = 0; i < d.rows(); ++i) {
    if (!d.row_pattern(i).all()) continue;
    acc += d.value(i, target);
    ++n_cc;
  }
  if (n_cc == 0) throw NoSupportError("no complete cases");
  EstimatorReport rep;
  rep.method = "cc";
  rep.point = acc / n_cc;
  rep.n_used["complete_cases"] = n_cc;
  return rep;
}

namespace {

// Shared accumulation for ra/ipw/aipw.  Each estimator is
//   (1/n) sum_i X_it I(target observed)  +  sum_j (1/n) sum_i term_j(i).
struct ComponentTerms {
  ConnectedPattern s;
  ModelPattern required;
  std::vector<int> nb;
  std::vector<int> a_rows;  // psi(missing) = s
  std::vector<int> b_rows;  // pattern >= required
};

std::vector<ComponentTerms> component_terms(const DataMatrix& d,
                                            const UndirectedGraph& g,
                                            int target) {
  std::vector<ComponentTerms> out;
  for (const auto& s : occurring_components(g, data_patterns(d), target)) {
    ComponentTerms t;
    t.s = s;
    t.required = g.model_pattern_of(s);
    t.nb = g.neighbors(s).indices();
    t.a_rows = rows_with_component(d, g, s, target);
    t.b_rows = rows_at_least(d, t.required);
    out.push_back(std::move(t));
  }
  return out;
}

double observed_target_sum(const DataMatrix& d, int target, int* count) {
  double acc = 0;
  int c = 0;
  for (int i = 0; i < d.rows(); ++i)
    if (d.row_pattern(i).test(target)) {
      acc += d.value(i, target);
      ++c;
    }
  if (count != nullptr) *count = c;
  return acc;
}

}  // namespace

EstimatorReport estimate_ra(const DataMatrix& d, const UndirectedGraph& g,
                            int target, const RegressionMap& regs) {
  EstimatorReport rep;
  rep.method = "ra";
  int n_obs = 0;
  double acc = observed_target_sum(d, target, &n_obs);
  rep.n_used["target_observed"] = n_obs;
  for (const auto& t : component_terms(d, g, target)) {
    auto it = regs.find(t.s);
    if (it == regs.end())
      throw ConfigError("missing regression nuisance for component " +
                        t.s.to_string());
    const auto& m = it->second;
    for (int i : t.a_rows) acc += m.predict(d.row_at(i, m.neighbors));
    rep.components.push_back({t.s.to_string(),
                              static_cast<int>(t.a_rows.size()),
                              static_cast<int>(t.b_rows.size()), 0, 0});
  }
  rep.point = d.rows() == 0 ? 0.0 : acc / d.rows();
  return rep;
}

EstimatorReport estimate_ipw(const DataMatrix& d, const UndirectedGraph& g,
                             int target, const OddsMap& odds) {
  EstimatorReport rep;
  rep.method = "ipw";
  int n_obs = 0;
  double acc = observed_target_sum(d, target, &n_obs);
  rep.n_used["target_observed"] = n_obs;
  for (const auto& t : component_terms(d, g, target)) {
    auto it = odds.find(t.s);
    if (it == odds.end())
      throw ConfigError("missing odds nuisance for component " +
                        t.s.to_string());
    const auto& m = it->second;
    double omin = std::numeric_limits<double>::infinity(), omax = 0;
    for (int i : t.b_rows) {
      double o = m.odds(d.row_at(i, m.neighbors));
      acc += d.value(i, target) * o;
      omin = std::min(omin, o);
      omax = std::max(omax, o);
    }
    if (m.separation) rep.warnings.push_back("separation in odds for " +
                                             t.s.to_string());
    rep.components.push_back({t.s.to_string(),
                              static_cast<int>(t.a_rows.size()),
                              static_cast<int>(t.b_rows.size()),
                              t.b_rows.empty() ? 0 : omin, omax});
  }
  rep.point = d.rows() == 0 ? 0.0 : acc / d.rows();
  return rep;
}

EstimatorReport estimate_aipw(const DataMatrix& d, const UndirectedGraph& g,
                              int target, const RegressionMap& regs,
                              const OddsMap& odds) {
  EstimatorReport rep;
  rep.method = "aipw";
  int n_obs = 0;
  double acc = observed_target_sum(d, target, &n_obs);
  rep.n_used["target_observed"] = n_obs;
  for (const auto& t : component_terms(d, g, target)) {
    auto rit = regs.find(t.s);
    auto oit = odds.find(t.s);
    if (rit == regs.end() || oit == odds.end())
      throw ConfigError("missing nuisance for component " + t.s.to_string());
    const auto& mreg = rit->second;
    const auto& modd = oit->second;
    double omin = std::numeric_limits<double>::infinity(), omax = 0;
    // IPW piece plus its augmentation over model-pattern rows.
    for (int i : t.b_rows) {
      Eigen::VectorXd xn = d.row_at(i, mreg.neighbors);
      double o = modd.odds(xn);
      acc += (d.value(i, target) - mreg.predict(xn)) * o;
      omin = std::min(omin, o);
      omax = std::max(omax, o);
    }
    // Regression piece over pattern rows.
    for (int i : t.a_rows) acc += mreg.predict(d.row_at(i, mreg.neighbors));
    if (modd.separation) rep.warnings.push_back("separation in odds for " +
                                                t.s.to_string());
    rep.components.push_back({t.s.to_string(),
                              static_cast<int>(t.a_rows.size()),
                              static_cast<int>(t.b_rows.size()),
                              t.b_rows.empty() ? 0 : omin, omax});
  }
  rep.point = d.rows() == 0 ? 0.0 : acc / d.rows();
  return rep;
}

ConfidenceInterval bootstrap(
    const std::function<double(const DataMatrix&)>& estimator,
    const DataMatrix& d, int B, double level, std::uint64_t seed) {
  if (B < 2) throw std::invalid_argument("bootstrap needs B >= 2");
  if (level <= 0 || level >= 1)
    throw std::invalid_argument("bootstrap level must be in (0,1)");
  const int n = d.rows();
  std::vector<double> estimates;
  estimates.reserve(B);
  int failures = 0;
  for (int b = 0; b < B; ++b) {
    RandomStream rng =
        RandomStream::derive(seed, {0xb007ull, static_cast<std::uint64_t>(b)});
    std::vector<int> rows(n);
    for (int i = 0; i < n; ++i)
      rows[i] = static_cast<int>(rng.uniform_index(n));
    try {
      estimates.push_back(estimator(d.subset_rows(rows)));
    } catch (const NoSupportError&) {
      ++failures;
    }
  }
  if (failures > B / 10)
    throw ResamplingError("bootstrap: " + std::to_string(failures) + " of " +
                          std::to_string(B) + " replicates failed");
  std::sort(estimates.begin(), estimates.end());
  auto quantile = [&](double q) {
    // Linear interpolation between order statistics.
    double pos = q * (static_cast<double>(estimates.size()) - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, estimates.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return (1 - frac) * estimates[lo] + frac * estimates[hi];
  };
  double alpha = 1.0 - level;
  return {quantile(alpha / 2), quantile(1.0 - alpha / 2), level};
}

}  // namespace mmg
