#include "mmg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "mmg/errors.hpp"
#include "mmg/graph_select.hpp"
#include "mmg/imputer.hpp"

namespace mmg {

namespace {

using nlohmann::json;

double expit(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

std::vector<ColumnSpec> numbered_columns(int d) {
  std::vector<ColumnSpec> cols;
  for (int j = 1; j <= d; ++j)
    cols.push_back({"x" + std::to_string(j), ColumnKind::Continuous, 0});
  return cols;
}

Eigen::VectorXd parse_vector(const json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

Eigen::MatrixXd parse_matrix(const json& j) {
  const int r = static_cast<int>(j.size());
  const int c = r > 0 ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

}  // namespace

int SimConfig::dimension() const {
  if (ggm.has_value()) return static_cast<int>(ggm->mu.size());
  if (mixture2.has_value()) return static_cast<int>(mixture2->mu1.size());
  throw ConfigError("simulation config has no scenario");
}

SimConfig SimConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config JSON parse failure: ") + e.what());
  }
  SimConfig cfg;
  const auto& sc = j.at("scenario");
  const std::string stype = sc.at("type").get<std::string>();
  if (stype == "ggm") {
    GgmScenario g;
    g.omega = parse_matrix(sc.at("omega"));
    g.mu = parse_vector(sc.at("mu"));
    if (g.omega.rows() != g.omega.cols() || g.omega.rows() != g.mu.size())
      throw ConfigError("ggm scenario dimensions disagree");
    cfg.ggm = std::move(g);
  } else if (stype == "mixture2") {
    Mixture2Scenario m;
    auto pi = sc.at("pi").get<std::vector<double>>();
    if (pi.size() != 2) throw ConfigError("mixture2 pi needs two weights");
    m.w1 = pi[0];
    m.w2 = pi[1];
    m.mu1 = parse_vector(sc.at("mu1"));
    m.mu2 = parse_vector(sc.at("mu2"));
    if (m.mu1.size() != m.mu2.size())
      throw ConfigError("mixture2 mean dimensions disagree");
    cfg.mixture2 = std::move(m);
  } else {
    throw ConfigError("unknown scenario type \"" + stype + "\"");
  }
  const auto& mech = j.at("mechanism");
  const std::string mtype = mech.at("type").get<std::string>();
  if (mtype == "mcar") {
    cfg.mcar = McarMechanism{mech.value("rho", 0.2)};
  } else if (mtype == "mar") {
    cfg.mar = MarMechanism{mech.value("beta0", -1.0)};
  } else {
    throw ConfigError("unknown mechanism type \"" + mtype + "\"");
  }
  cfg.n = j.value("n", 2000);
  cfg.trials = j.value("trials", 100);
  cfg.m_imputations = j.value("m", 20);
  cfg.family = family_from_name(j.value("family", std::string("gaussian")));
  cfg.mixture_k = j.value("k", 2);
  if (!j.contains("seed"))
    throw ConfigError("config must carry an explicit \"seed\"");
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.target = j.value("target", 1);
  cfg.allow_fallback = j.value("allow_fallback", false);
  const std::string est = j.value("estimand", std::string("median"));
  if (est == "median")
    cfg.estimand = Estimand::Median;
  else if (est == "mean")
    cfg.estimand = Estimand::Mean;
  else
    throw ConfigError("unknown estimand \"" + est + "\"");
  if (j.contains("graph")) {
    const auto& gj = j.at("graph");
    const std::string gtype = gj.value("type", std::string("fixed"));
    if (gtype == "fixed") {
      std::vector<std::pair<int, int>> edges;
      for (const auto& e : gj.at("edges"))
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
      cfg.working_graph =
          UndirectedGraph(gj.value("d", cfg.dimension()), std::move(edges));
    } else if (gtype == "estimate") {
      cfg.graph_threshold = gj.value("threshold", 0.15);
    } else {
      throw ConfigError("unknown graph spec type \"" + gtype + "\"");
    }
  }
  const int d = cfg.dimension();
  if (cfg.mcar.has_value() && (cfg.mcar->rho < 0 || cfg.mcar->rho >= 1))
    throw ConfigError("mcar rho must be in [0,1)");
  if (cfg.n < d + 2) throw ConfigError("n must be at least d + 2");
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.target < 1 || cfg.target > d)
    throw ConfigError("target out of range");
  return cfg;
}

DataMatrix sample_ggm(const Eigen::MatrixXd& omega, const Eigen::VectorXd& mu,
                      int n, RandomStream& rng) {
  const int d = static_cast<int>(mu.size());
  if (omega.rows() != d || omega.cols() != d)
    throw std::invalid_argument("sample_ggm: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt_omega(omega);
  if (llt_omega.info() != Eigen::Success)
    throw DecompositionError("precision matrix is not positive definite");
  Eigen::MatrixXd sigma =
      llt_omega.solve(Eigen::MatrixXd::Identity(d, d));
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt_sigma(sigma);
  if (llt_sigma.info() != Eigen::Success)
    throw DecompositionError("implied covariance is not positive definite");
  Eigen::MatrixXd chol = llt_sigma.matrixL();

  Eigen::MatrixXd values(n, d);
  Eigen::VectorXd z(d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) z[k] = rng.normal();
    values.row(i) = (mu + chol * z).transpose();
  }
  return DataMatrix(numbered_columns(d), std::move(values),
                    std::vector<ResponsePattern>(n, Pattern::ones(d)));
}

DataMatrix sample_mixture2(double w1, double w2, const Eigen::VectorXd& mu1,
                           const Eigen::VectorXd& mu2, int n,
                           RandomStream& rng) {
  if (w1 < 0 || w2 < 0 || std::abs(w1 + w2 - 1.0) > 1e-12)
    throw std::invalid_argument(
        "mixture weights must be nonnegative and sum to one");
  if (mu1.size() != mu2.size())
    throw std::invalid_argument("mixture mean dimensions disagree");
  const int d = static_cast<int>(mu1.size());
  Eigen::MatrixXd values(n, d);
  for (int i = 0; i < n; ++i) {
    bool first = rng.bernoulli(w1);
    const Eigen::VectorXd& mu = first ? mu1 : mu2;
    for (int k = 0; k < d; ++k) values(i, k) = mu[k] + rng.normal();
  }
  return DataMatrix(numbered_columns(d), std::move(values),
                    std::vector<ResponsePattern>(n, Pattern::ones(d)));
}

DataMatrix mask_mcar(const DataMatrix& d, double rho, RandomStream& rng) {
  if (rho < 0 || rho >= 1)
    throw std::invalid_argument("mcar rate must be in [0,1)");
  const int p = d.cols();
  std::vector<ResponsePattern> pats;
  pats.reserve(d.rows());
  for (int i = 0; i < d.rows(); ++i) {
    Pattern r = Pattern::zeros(p);
    do {
      r = Pattern::zeros(p);
      for (int j = 1; j <= p; ++j)
        if (!rng.bernoulli(rho)) r.set(j);
    } while (r.none());  // reject unit nonresponse
    pats.push_back(r & d.row_pattern(i));
  }
  return DataMatrix(d.columns(), d.values(), std::move(pats));
}

DataMatrix mask_mar(const DataMatrix& d, double beta0, RandomStream& rng) {
  const int p = d.cols();
  if (p > 16)
    throw std::invalid_argument(
        "mar mechanism enumerates 2^d patterns; d > 16 unsupported");
  const std::uint32_t npat = (1u << p) - 1;  // all but unit nonresponse
  std::vector<double> w(npat);
  std::vector<ResponsePattern> pats;
  pats.reserve(d.rows());
  for (int i = 0; i < d.rows(); ++i) {
    for (std::uint32_t b = 1; b <= npat; ++b) {
      double s = beta0;
      for (int j = 0; j < p; ++j)
        if ((b >> j) & 1u) s += d.value(i, j + 1);
      w[b - 1] = expit(s);
    }
    const std::uint32_t pick =
        static_cast<std::uint32_t>(rng.categorical(w)) + 1;
    pats.push_back(Pattern(p, pick) & d.row_pattern(i));
  }
  return DataMatrix(d.columns(), d.values(), std::move(pats));
}

double column_median(const DataMatrix& d, int var, bool complete_rows_only) {
  std::vector<double> v;
  for (int i = 0; i < d.rows(); ++i) {
    if (complete_rows_only && !d.row_pattern(i).all()) continue;
    if (!d.observed(i, var)) continue;
    v.push_back(d.value(i, var));
  }
  if (v.empty()) throw NoSupportError("median over an empty selection");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

double column_mean(const DataMatrix& d, int var, bool complete_rows_only) {
  double acc = 0;
  int n = 0;
  for (int i = 0; i < d.rows(); ++i) {
    if (complete_rows_only && !d.row_pattern(i).all()) continue;
    if (!d.observed(i, var)) continue;
    acc += d.value(i, var);
    ++n;
  }
  if (n == 0) throw NoSupportError("mean over an empty selection");
  return acc / n;
}

double estimand_value(const DataMatrix& d, int var, Estimand e,
                      bool complete_rows_only) {
  return e == Estimand::Median ? column_median(d, var, complete_rows_only)
                               : column_mean(d, var, complete_rows_only);
}

}  // namespace

ExperimentSummary run_experiment(const SimConfig& cfg) {
  if (!cfg.ggm.has_value() && !cfg.mixture2.has_value())
    throw ConfigError("experiment config has no scenario");
  if (!cfg.mcar.has_value() && !cfg.mar.has_value())
    throw ConfigError("experiment config has no missingness mechanism");
  if (cfg.family == SubmodelFamily::Ising)
    throw ConfigError(
        "both scenarios generate continuous data; the ising family needs "
        "binary columns");
  ExperimentSummary out;
  for (int t = 0; t < cfg.trials; ++t) {
    try {
      RandomStream gen = RandomStream::derive(cfg.seed,
                                              {static_cast<std::uint64_t>(t), 0});
      DataMatrix full =
          cfg.ggm.has_value()
              ? sample_ggm(cfg.ggm->omega, cfg.ggm->mu, cfg.n, gen)
              : sample_mixture2(cfg.mixture2->w1, cfg.mixture2->w2,
                                cfg.mixture2->mu1, cfg.mixture2->mu2, cfg.n,
                                gen);
      RandomStream mask = RandomStream::derive(cfg.seed,
                                               {static_cast<std::uint64_t>(t), 1});
      DataMatrix masked = cfg.mcar.has_value()
                              ? mask_mcar(full, cfg.mcar->rho, mask)
                              : mask_mar(full, cfg.mar->beta0, mask);

      const double full_est =
          estimand_value(full, cfg.target, cfg.estimand, false);
      const double cc_est =
          estimand_value(masked, cfg.target, cfg.estimand, true);

      UndirectedGraph g =
          cfg.working_graph.has_value()
              ? *cfg.working_graph
              : partial_corr_graph(masked, cfg.graph_threshold);

      FitOptions fit;
      fit.family = cfg.family;
      fit.mixture_k = cfg.mixture_k;
      fit.allow_fallback = cfg.allow_fallback;
      fit.mp.seed =
          RandomStream::derive(cfg.seed, {static_cast<std::uint64_t>(t), 2})
              .next_u64();
      SubmodelStore store = fit_all(g, masked, fit);
      ImputationRun run = multiple_impute(
          store, masked, cfg.m_imputations,
          RandomStream::derive(cfg.seed, {static_cast<std::uint64_t>(t), 3})
              .next_u64());
      std::vector<double> per_dataset;
      for (const auto& ds : run.datasets)
        per_dataset.push_back(
            estimand_value(ds, cfg.target, cfg.estimand, false));
      const double mmg_est = pool(per_dataset).point;

      out.rows.push_back({"mmg", t, mmg_est});
      out.rows.push_back({"cc", t, cc_est});
      out.rows.push_back({"full", t, full_est});
    } catch (const Error&) {
      ++out.failed_trials;
    }
  }
  if (out.failed_trials * 5 > cfg.trials)
    throw ResamplingError("experiment: " +
                          std::to_string(out.failed_trials) + " of " +
                          std::to_string(cfg.trials) + " trials failed");

  std::map<std::string, std::vector<double>> by_method;
  for (const auto& r : out.rows) by_method[r.method].push_back(r.estimate);
  double full_mean = 0;
  if (by_method.count("full")) {
    for (double v : by_method["full"]) full_mean += v;
    full_mean /= static_cast<double>(by_method["full"].size());
  }
  for (const std::string method : {"mmg", "cc", "full"}) {
    if (!by_method.count(method)) continue;
    const auto& v = by_method[method];
    ExperimentSummary::Aggregate a;
    a.method = method;
    for (double x : v) a.mean += x;
    a.mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - a.mean) * (x - a.mean);
    a.sd = v.size() > 1 ? std::sqrt(ss / (static_cast<double>(v.size()) - 1))
                        : 0.0;
    a.bias = a.mean - full_mean;
    out.aggregates.push_back(a);
  }
  return out;
}

void write_experiment(const ExperimentSummary& s,
                      const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  char buf[64];
  std::ofstream sum(outdir / "summary.csv");
  if (!sum) throw ParseError("cannot write summary.csv");
  sum << "method,trial,estimate\n";
  for (const auto& r : s.rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.estimate);
    sum << r.method << "," << r.trial << "," << buf << "\n";
  }
  std::ofstream agg(outdir / "aggregate.csv");
  if (!agg) throw ParseError("cannot write aggregate.csv");
  agg << "method,mean,sd,bias\n";
  for (const auto& a : s.aggregates) {
    agg << a.method;
    std::snprintf(buf, sizeof(buf), "%.17g", a.mean);
    agg << "," << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", a.sd);
    agg << "," << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", a.bias);
    agg << "," << buf << "\n";
  }
}

}  // namespace mmg
