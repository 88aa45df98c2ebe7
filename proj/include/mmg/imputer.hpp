#ifndef MMG_IMPUTER_HPP_
#define MMG_IMPUTER_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmg/submodels.hpp"

namespace mmg {

struct FitOptions {
  SubmodelFamily family = SubmodelFamily::Gaussian;
  int mixture_k = 2;
  IsingOptions ising;
  MPOptions mp;
  // When a connected pattern lacks qualifying rows, fit a marginal model
  // over the rows observing the pattern itself instead of failing.  This
  // substitute ignores the neighborhood and is an extrapolation heuristic;
  // entries fitted this way are labeled in the store.
  bool allow_fallback = false;
};

// All fitted imputation submodels for one (graph, family) configuration,
// keyed by connected pattern.  Fits depend on the connected pattern alone,
// so any two response patterns sharing a component share the entry.
class SubmodelStore {
 public:
  struct Entry {
    SubmodelParams params;
    int support = 0;              // qualifying-row count used for the fit
    bool fallback_marginal = false;
  };

  SubmodelStore(SubmodelFamily family, int mixture_k, UndirectedGraph graph)
      : family_(family), mixture_k_(mixture_k), graph_(std::move(graph)) {}

  SubmodelFamily family() const { return family_; }
  int mixture_k() const { return mixture_k_; }
  const UndirectedGraph& graph() const { return graph_; }
  const std::map<Pattern, Entry>& fits() const { return fits_; }

  bool has(const ConnectedPattern& s) const { return fits_.count(s) > 0; }
  const Entry& at(const ConnectedPattern& s) const;
  void insert(const ConnectedPattern& s, Entry e) {
    fits_.insert_or_assign(s, std::move(e));
  }

  std::string to_json() const;
  static SubmodelStore from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static SubmodelStore load(const std::filesystem::path& path);

 private:
  SubmodelFamily family_;
  int mixture_k_;
  UndirectedGraph graph_;
  std::map<Pattern, Entry> fits_;
};

// Fits one submodel per connected pattern occurring in the data's missing
// sets.  Collects per-pattern no-support failures and throws an aggregated
// NoSupportError unless the fallback flag rescues every failing pattern.
SubmodelStore fit_all(const UndirectedGraph& g, const DataMatrix& d,
                      const FitOptions& opts);

// Record of which conditioning set produced each component draw; used to
// verify the factorization.
struct ImputeLogEntry {
  ConnectedPattern component;
  Pattern conditioning;  // variables conditioned on
};

// Completes one row: each connected component of the missing set is drawn
// independently from its fitted conditional given the component's observed
// neighborhood.  Observed entries pass through untouched and a fully
// observed row consumes no randomness.
Eigen::VectorXd impute_row(const SubmodelStore& store,
                           const Eigen::VectorXd& row_values,
                           const ResponsePattern& row_pattern,
                           RandomStream& rng,
                           std::vector<ImputeLogEntry>* log = nullptr);

struct ImputationRun {
  std::vector<DataMatrix> datasets;
  std::uint64_t seed = 0;
  // 1 where the cell was imputed, 0 where it was observed.
  std::vector<Pattern> imputed_mask;  // per row: imputed variables
};

// m independent completions with per-(dataset, row) derived streams, so
// results do not depend on traversal order.
ImputationRun multiple_impute(const SubmodelStore& store, const DataMatrix& d,
                              int m, std::uint64_t seed);

// Writes imp_001.csv ... imp_<m>.csv, provenance.csv and store.json.
void write_imputation_run(const ImputationRun& run, const SubmodelStore& store,
                          const std::filesystem::path& outdir);

struct PoolResult {
  double point = 0;
  std::optional<double> variance;  // Rubin total variance when available
};

// Mean of per-dataset estimates; with within-imputation variances supplied,
// total variance = mean(within) + (1 + 1/m) * between.
PoolResult pool(const std::vector<double>& estimates,
                const std::vector<double>* within_variances = nullptr);

}  // namespace mmg

#endif  // MMG_IMPUTER_HPP_
