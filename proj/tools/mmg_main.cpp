// Command-line front end: graph estimation, imputation, target-mean
// estimation, and the simulation harness.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmg/dataset.hpp"
#include "mmg/errors.hpp"
#include "mmg/estimators.hpp"
#include "mmg/graph.hpp"
#include "mmg/graph_select.hpp"
#include "mmg/imputer.hpp"
#include "mmg/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNoSupport = 4;
constexpr int kExitNumerical = 5;

mmg::DataMatrix load_input(const std::string& input,
                           const std::string& schema_path) {
  if (schema_path.empty()) return mmg::load_csv(input);
  std::ifstream in(schema_path);
  if (!in) throw mmg::ParseError("cannot open schema file: " + schema_path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, true, true);
  std::vector<mmg::ColumnSpec> schema;
  for (const auto& cj : j) {
    mmg::ColumnSpec c;
    c.name = cj.at("name").get<std::string>();
    const std::string kind = cj.value("kind", std::string("continuous"));
    if (kind == "continuous") {
      c.kind = mmg::ColumnKind::Continuous;
    } else if (kind == "binary") {
      c.kind = mmg::ColumnKind::Binary;
    } else if (kind == "count") {
      c.kind = mmg::ColumnKind::Count;
      c.count_max = cj.at("max").get<int>();
    } else {
      throw mmg::SchemaError("unknown column kind \"" + kind + "\"");
    }
    schema.push_back(c);
  }
  return mmg::load_csv(input, schema);
}

// Without an explicit schema the family decides the column treatment:
// gaussian imputes continuous values (0/1 columns must not be promoted,
// or its draws would fail range validation), ising requires binary
// everywhere, and mp keeps the 0/1 promotion so binary columns get
// Binomial component laws.
mmg::DataMatrix load_for_family(const std::string& input,
                                const std::string& schema_path,
                                mmg::SubmodelFamily family) {
  if (!schema_path.empty()) return load_input(input, schema_path);
  if (family == mmg::SubmodelFamily::MP) return mmg::load_csv(input);
  mmg::DataMatrix probe = mmg::load_csv(input);
  std::vector<mmg::ColumnSpec> schema = probe.columns();
  for (auto& c : schema)
    c.kind = family == mmg::SubmodelFamily::Ising
                 ? mmg::ColumnKind::Binary
                 : mmg::ColumnKind::Continuous;
  return mmg::load_csv(input, schema);
}

int run(int argc, char** argv) {
  CLI::App app{"Graph-based multiple imputation for incomplete data"};
  app.require_subcommand(1);

  // ---- graph estimate ----
  auto* graph_cmd = app.add_subcommand("graph", "Working-graph utilities");
  graph_cmd->require_subcommand(1);
  auto* graph_est =
      graph_cmd->add_subcommand("estimate",
                                "Estimate a working graph from complete cases "
                                "by partial-correlation thresholding");
  std::string ge_input, ge_output, ge_schema;
  double ge_threshold = 0.15;
  graph_est->add_option("--input", ge_input, "Input CSV")->required();
  graph_est->add_option("--threshold", ge_threshold,
                        "Absolute partial-correlation threshold");
  graph_est->add_option("--output", ge_output, "Output edge-list file")
      ->required();
  graph_est->add_option("--schema", ge_schema, "Optional column schema JSON");
  graph_est->callback([&]() {
    auto d = load_input(ge_input, ge_schema);
    auto g = mmg::partial_corr_graph(d, ge_threshold);
    mmg::write_graph(g, ge_output);
    std::cout << "wrote " << ge_output << " (" << g.edges().size()
              << " edges)\n";
  });

  // ---- impute ----
  auto* impute = app.add_subcommand("impute",
                                    "Fit submodels and write multiple "
                                    "imputations");
  std::string im_input, im_graph, im_family = "gaussian", im_outdir,
              im_schema;
  int im_k = 2, im_m = 20;
  std::optional<std::uint64_t> im_seed;
  bool im_fallback = false;
  impute->add_option("--input", im_input, "Input CSV")->required();
  impute->add_option("--graph", im_graph, "Working-graph edge list")
      ->required();
  impute->add_option("--family", im_family,
                     "Submodel family: gaussian|ising|mp");
  impute->add_option("--k", im_k, "Mixture components for the mp family");
  impute->add_option("--m", im_m, "Number of completed datasets");
  impute->add_option("--seed", im_seed, "RNG seed (required)");
  impute->add_option("--outdir", im_outdir, "Output directory")->required();
  impute->add_option("--schema", im_schema, "Optional column schema JSON");
  impute->add_flag("--allow-fallback", im_fallback,
                   "Fit a marginal model when a pattern has no support");
  impute->callback([&]() {
    if (!im_seed.has_value())
      throw CLI::ValidationError("--seed",
                                 "imputation is stochastic; --seed required");
    const auto family = mmg::family_from_name(im_family);
    auto d = load_for_family(im_input, im_schema, family);
    auto g = mmg::read_graph(im_graph);
    mmg::FitOptions opts;
    opts.family = family;
    opts.mixture_k = im_k;
    opts.allow_fallback = im_fallback;
    opts.mp.seed = *im_seed;
    auto store = mmg::fit_all(g, d, opts);
    auto run = mmg::multiple_impute(store, d, im_m, *im_seed);
    mmg::write_imputation_run(run, store, im_outdir);
    std::cout << "wrote " << im_m << " completed datasets to " << im_outdir
              << "\n";
  });

  // ---- estimate ----
  auto* est = app.add_subcommand("estimate",
                                 "Estimate the mean of a target column");
  std::string es_input, es_graph, es_target, es_method = "aipw", es_output,
              es_schema;
  int es_bootstrap = 0;
  double es_level = 0.95;
  std::optional<std::uint64_t> es_seed;
  est->add_option("--input", es_input, "Input CSV")->required();
  est->add_option("--graph", es_graph, "Working-graph edge list")->required();
  est->add_option("--target", es_target, "Target column name")->required();
  est->add_option("--method", es_method, "cc|ra|ipw|aipw");
  est->add_option("--bootstrap", es_bootstrap,
                  "Bootstrap replicates for a percentile CI (0 = none)");
  est->add_option("--level", es_level, "CI level");
  est->add_option("--seed", es_seed, "RNG seed (required with --bootstrap)");
  est->add_option("--output", es_output, "Output report JSON")->required();
  est->add_option("--schema", es_schema, "Optional column schema JSON");
  est->callback([&]() {
    if (es_bootstrap > 0 && !es_seed.has_value())
      throw CLI::ValidationError("--seed",
                                 "bootstrap is stochastic; --seed required");
    auto d = load_input(es_input, es_schema);
    auto g = mmg::read_graph(es_graph);
    const int target = d.column_index(es_target);
    auto point_estimator = [&](const mmg::DataMatrix& data) {
      if (es_method == "cc") return mmg::estimate_cc(data, target);
      if (es_method == "ra")
        return mmg::estimate_ra(data, g, target,
                                mmg::fit_all_regressions(data, g, target));
      if (es_method == "ipw")
        return mmg::estimate_ipw(data, g, target,
                                 mmg::fit_all_odds(data, g, target));
      if (es_method == "aipw")
        return mmg::estimate_aipw(data, g, target,
                                  mmg::fit_all_regressions(data, g, target),
                                  mmg::fit_all_odds(data, g, target));
      throw CLI::ValidationError("--method",
                                 "expected one of cc|ra|ipw|aipw");
    };
    mmg::EstimatorReport rep = point_estimator(d);
    if (es_bootstrap > 0) {
      rep.ci = mmg::bootstrap(
          [&](const mmg::DataMatrix& data) {
            return point_estimator(data).point;
          },
          d, es_bootstrap, es_level, *es_seed);
    }
    std::ofstream out(es_output);
    if (!out)
      throw mmg::ParseError("cannot open report file: " + es_output);
    out << rep.to_json() << "\n";
    std::cout << es_method << " estimate: " << rep.point << "\n";
  });

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "Run a simulation experiment");
  std::string si_config, si_outdir;
  sim->add_option("--config", si_config, "Experiment config JSON")->required();
  sim->add_option("--outdir", si_outdir, "Output directory")->required();
  sim->callback([&]() {
    std::ifstream in(si_config);
    if (!in) throw mmg::ParseError("cannot open config file: " + si_config);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    auto cfg = mmg::SimConfig::from_json(text);
    auto summary = mmg::run_experiment(cfg);
    mmg::write_experiment(summary, si_outdir);
    std::cout << "wrote " << si_outdir << "/summary.csv and aggregate.csv ("
              << summary.failed_trials << " failed trials)\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mmg::NoSupportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoSupport;
  } catch (const mmg::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const mmg::ResamplingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const mmg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
