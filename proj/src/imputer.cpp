#include "mmg/imputer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "mmg/errors.hpp"

namespace mmg {

namespace {

using nlohmann::json;

SubmodelParams fit_family_rows(const DataMatrix& d,
                               const std::vector<int>& rows,
                               const std::vector<int>& scope,
                               const FitOptions& opts,
                               std::uint64_t key_bits) {
  switch (opts.family) {
    case SubmodelFamily::Gaussian:
      return fit_gaussian_rows(d, rows, scope);
    case SubmodelFamily::Ising:
      return fit_ising_rows(d, rows, scope, opts.ising);
    case SubmodelFamily::MP: {
      MPOptions mp = opts.mp;
      // Give every key its own deterministic stream.
      mp.seed = RandomStream::derive(opts.mp.seed, {key_bits}).next_u64();
      return fit_mp_rows(d, rows, scope, opts.mixture_k, mp);
    }
  }
  throw ConfigError("unknown submodel family");
}

json params_to_json(const SubmodelParams& p) {
  json j;
  if (const auto* g = std::get_if<GaussianParams>(&p)) {
    j["family"] = "gaussian";
    j["scope"] = g->scope;
    j["mean"] = std::vector<double>(g->mean.data(),
                                    g->mean.data() + g->mean.size());
    json cov = json::array();
    for (int r = 0; r < g->cov.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < g->cov.cols(); ++c) row.push_back(g->cov(r, c));
      cov.push_back(row);
    }
    j["cov"] = cov;
    j["singular"] = g->cov_singular;
  } else if (const auto* is = std::get_if<IsingParams>(&p)) {
    j["family"] = "ising";
    j["scope"] = is->scope;
    j["field"] = std::vector<double>(is->field.data(),
                                     is->field.data() + is->field.size());
    json coup = json::array();
    for (int r = 0; r < is->coupling.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < is->coupling.cols(); ++c)
        row.push_back(is->coupling(r, c));
      coup.push_back(row);
    }
    j["coupling"] = coup;
    j["log_partition"] = is->log_partition;
  } else {
    const auto& mp = std::get<MPParams>(p);
    j["family"] = "mp";
    j["scope"] = mp.scope;
    j["weights"] = std::vector<double>(mp.weights.data(),
                                       mp.weights.data() + mp.weights.size());
    json comps = json::array();
    for (const auto& comp : mp.comps) {
      json cj = json::array();
      for (const auto& u : comp) {
        if (u.kind == UnivariateParam::Kind::Gaussian)
          cj.push_back({{"kind", "gaussian"}, {"mean", u.mean},
                        {"var", u.var}});
        else
          cj.push_back({{"kind", "binomial"}, {"trials", u.trials},
                        {"prob", u.prob}});
      }
      comps.push_back(cj);
    }
    j["components"] = comps;
  }
  return j;
}

SubmodelParams params_from_json(const json& j) {
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "gaussian") {
    GaussianParams g;
    g.scope = j.at("scope").get<std::vector<int>>();
    auto mean = j.at("mean").get<std::vector<double>>();
    g.mean = Eigen::Map<Eigen::VectorXd>(mean.data(),
                                         static_cast<int>(mean.size()));
    const auto& cov = j.at("cov");
    const int m = static_cast<int>(cov.size());
    g.cov.resize(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) g.cov(r, c) = cov[r][c].get<double>();
    g.cov_singular = j.value("singular", false);
    return g;
  }
  if (fam == "ising") {
    IsingParams is;
    is.scope = j.at("scope").get<std::vector<int>>();
    auto field = j.at("field").get<std::vector<double>>();
    is.field = Eigen::Map<Eigen::VectorXd>(field.data(),
                                           static_cast<int>(field.size()));
    const auto& coup = j.at("coupling");
    const int m = static_cast<int>(coup.size());
    is.coupling.resize(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) is.coupling(r, c) = coup[r][c].get<double>();
    is.log_partition = j.at("log_partition").get<double>();
    return is;
  }
  if (fam == "mp") {
    MPParams mp;
    mp.scope = j.at("scope").get<std::vector<int>>();
    auto w = j.at("weights").get<std::vector<double>>();
    mp.weights = Eigen::Map<Eigen::VectorXd>(w.data(),
                                             static_cast<int>(w.size()));
    for (const auto& cj : j.at("components")) {
      std::vector<UnivariateParam> comp;
      for (const auto& uj : cj) {
        UnivariateParam u;
        if (uj.at("kind") == "gaussian") {
          u.kind = UnivariateParam::Kind::Gaussian;
          u.mean = uj.at("mean").get<double>();
          u.var = uj.at("var").get<double>();
        } else {
          u.kind = UnivariateParam::Kind::Binomial;
          u.trials = uj.at("trials").get<int>();
          u.prob = uj.at("prob").get<double>();
        }
        comp.push_back(u);
      }
      mp.comps.push_back(std::move(comp));
    }
    return mp;
  }
  throw ParseError("unknown submodel family in store: \"" + fam + "\"");
}

}  // namespace

const SubmodelStore::Entry& SubmodelStore::at(const ConnectedPattern& s) const {
  auto it = fits_.find(s);
  if (it == fits_.end())
    throw NoSupportError("no fitted submodel for connected pattern " +
                         s.to_string());
  return it->second;
}

std::string SubmodelStore::to_json() const {
  json j;
  j["family"] = family_name(family_);
  j["k"] = mixture_k_;
  json gj;
  gj["d"] = graph_.vertex_count();
  json edges = json::array();
  for (const auto& [u, v] : graph_.edges()) edges.push_back({u, v});
  gj["edges"] = edges;
  j["graph"] = gj;
  json fits = json::object();
  for (const auto& [s, entry] : fits_) {
    json ej;
    ej["support"] = entry.support;
    ej["fallback"] = entry.fallback_marginal;
    ej["params"] = params_to_json(entry.params);
    fits[s.to_string()] = ej;
  }
  j["fits"] = fits;
  return j.dump(2);
}

SubmodelStore SubmodelStore::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("store JSON parse failure: ") + e.what());
  }
  const auto& gj = j.at("graph");
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : gj.at("edges"))
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  UndirectedGraph g(gj.at("d").get<int>(), std::move(edges));
  SubmodelStore store(family_from_name(j.at("family").get<std::string>()),
                      j.value("k", 1), std::move(g));
  for (const auto& [key, ej] : j.at("fits").items()) {
    Entry entry;
    entry.support = ej.at("support").get<int>();
    entry.fallback_marginal = ej.value("fallback", false);
    entry.params = params_from_json(ej.at("params"));
    store.insert(Pattern::from_string(key), std::move(entry));
  }
  return store;
}

void SubmodelStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open store file for write: " +
                             path.string());
  out << to_json() << "\n";
}

SubmodelStore SubmodelStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open store file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

SubmodelStore fit_all(const UndirectedGraph& g, const DataMatrix& d,
                      const FitOptions& opts) {
  SubmodelStore store(opts.family, opts.mixture_k, g);
  std::set<Pattern> keys;
  for (const auto& r : pattern_table(d).patterns())
    for (const auto& s : g.missing_components(r)) keys.insert(s);

  std::vector<std::string> failures;
  for (const auto& s : keys) {
    const ModelPattern required = g.model_pattern_of(s);
    const auto rows = rows_at_least(d, required);
    try {
      SubmodelStore::Entry entry;
      entry.params = fit_family_rows(d, rows, required.indices(), opts,
                                     s.bits());
      entry.support = static_cast<int>(rows.size());
      store.insert(s, std::move(entry));
      continue;
    } catch (const NoSupportError& e) {
      if (!opts.allow_fallback) {
        failures.push_back(s.to_string() + ": " + e.what());
        continue;
      }
    } catch (const DegenerateFitError& e) {
      failures.push_back(s.to_string() + ": " + e.what());
      continue;
    }
    // Marginal fallback over rows observing s itself.
    try {
      const auto own_rows = rows_at_least(d, s);
      SubmodelStore::Entry entry;
      entry.params = fit_family_rows(d, own_rows, s.indices(), opts, s.bits());
      entry.support = static_cast<int>(own_rows.size());
      entry.fallback_marginal = true;
      store.insert(s, std::move(entry));
    } catch (const Error& e) {
      failures.push_back(s.to_string() + ": fallback failed: " + e.what());
    }
  }
  if (!failures.empty()) {
    std::string msg = "no support for " + std::to_string(failures.size()) +
                      " connected pattern(s):";
    for (const auto& f : failures) msg += "\n  " + f;
    throw NoSupportError(msg);
  }
  return store;
}

Eigen::VectorXd impute_row(const SubmodelStore& store,
                           const Eigen::VectorXd& row_values,
                           const ResponsePattern& row_pattern,
                           RandomStream& rng,
                           std::vector<ImputeLogEntry>* log) {
  Eigen::VectorXd out = row_values;
  const auto& g = store.graph();
  for (const auto& s : g.missing_components(row_pattern)) {
    const auto& entry = store.at(s);
    std::vector<int> observed;
    if (!entry.fallback_marginal) observed = g.neighbors(s).indices();
    Eigen::VectorXd obs_values(static_cast<int>(observed.size()));
    for (std::size_t a = 0; a < observed.size(); ++a)
      obs_values[static_cast<int>(a)] = row_values[observed[a] - 1];
    if (log != nullptr)
      log->push_back({s, Pattern::from_indices(row_pattern.size(), observed)});

    if (const auto* gp = std::get_if<GaussianParams>(&entry.params)) {
      auto cond = gaussian_conditional(*gp, observed, obs_values);
      Eigen::VectorXd draw = gaussian_draw(cond.mean, cond.cov, rng);
      for (std::size_t a = 0; a < cond.missing.size(); ++a)
        out[cond.missing[a] - 1] = draw[static_cast<int>(a)];
    } else if (const auto* ip = std::get_if<IsingParams>(&entry.params)) {
      auto cond = ising_conditional_pmf(*ip, observed, obs_values);
      int pick = rng.categorical(cond.pmf);
      for (std::size_t a = 0; a < cond.missing.size(); ++a)
        out[cond.missing[a] - 1] =
            static_cast<double>((pick >> a) & 1);
    } else {
      const auto& mp = std::get<MPParams>(entry.params);
      std::vector<int> missing_vars;
      Eigen::VectorXd draw =
          mp_conditional_sample(mp, observed, obs_values, rng, &missing_vars);
      for (std::size_t a = 0; a < missing_vars.size(); ++a)
        out[missing_vars[a] - 1] = draw[static_cast<int>(a)];
    }
  }
  return out;
}

ImputationRun multiple_impute(const SubmodelStore& store, const DataMatrix& d,
                              int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("multiple_impute needs m >= 1");
  ImputationRun run;
  run.seed = seed;
  for (int i = 0; i < d.rows(); ++i)
    run.imputed_mask.push_back(d.row_pattern(i).complement());

  const auto full = Pattern::ones(d.cols());
  for (int t = 0; t < m; ++t) {
    Eigen::MatrixXd values(d.rows(), d.cols());
    std::vector<ResponsePattern> pats(d.rows(), full);
    for (int i = 0; i < d.rows(); ++i) {
      RandomStream rng = RandomStream::derive(
          seed, {static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(i)});
      values.row(i) =
          impute_row(store, d.values().row(i).transpose(), d.row_pattern(i),
                     rng)
              .transpose();
    }
    run.datasets.emplace_back(d.columns(), std::move(values), std::move(pats));
  }
  return run;
}

void write_imputation_run(const ImputationRun& run, const SubmodelStore& store,
                          const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  char name[32];
  for (std::size_t t = 0; t < run.datasets.size(); ++t) {
    std::snprintf(name, sizeof(name), "imp_%03zu.csv", t + 1);
    write_csv(run.datasets[t], outdir / name);
  }
  const auto& first = run.datasets.front();
  std::ofstream prov(outdir / "provenance.csv");
  if (!prov) throw ParseError("cannot write provenance.csv");
  for (int j = 0; j < first.cols(); ++j)
    prov << (j ? "," : "") << first.columns()[j].name;
  prov << "\n";
  for (std::size_t i = 0; i < run.imputed_mask.size(); ++i) {
    for (int j = 1; j <= first.cols(); ++j)
      prov << (j > 1 ? "," : "") << (run.imputed_mask[i].test(j) ? 1 : 0);
    prov << "\n";
  }
  store.save(outdir / "store.json");
}

PoolResult pool(const std::vector<double>& estimates,
                const std::vector<double>* within_variances) {
  if (estimates.empty())
    throw std::invalid_argument("pool: empty estimate list");
  const double m = static_cast<double>(estimates.size());
  PoolResult out;
  for (double e : estimates) out.point += e;
  out.point /= m;
  if (within_variances != nullptr) {
    if (within_variances->size() != estimates.size())
      throw std::invalid_argument("pool: variance count mismatch");
    double within = 0;
    for (double v : *within_variances) within += v;
    within /= m;
    double between = 0;
    for (double e : estimates) between += (e - out.point) * (e - out.point);
    between = estimates.size() > 1 ? between / (m - 1) : 0.0;
    out.variance = within + (1.0 + 1.0 / m) * between;
  }
  return out;
}

}  // namespace mmg
