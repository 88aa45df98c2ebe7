#ifndef MMG_SIM_HPP_
#define MMG_SIM_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmg/dataset.hpp"
#include "mmg/graph.hpp"
#include "mmg/rng.hpp"
#include "mmg/submodels.hpp"

namespace mmg {

struct GgmScenario {
  Eigen::MatrixXd omega;  // precision matrix (SPD)
  Eigen::VectorXd mu;
};

struct Mixture2Scenario {
  double w1 = 0.34;
  double w2 = 0.66;
  Eigen::VectorXd mu1;
  Eigen::VectorXd mu2;
};

struct McarMechanism {
  double rho = 0.2;
};

struct MarMechanism {
  double beta0 = -1.0;
};

enum class Estimand { Mean, Median };

struct SimConfig {
  std::optional<GgmScenario> ggm;
  std::optional<Mixture2Scenario> mixture2;
  std::optional<McarMechanism> mcar;
  std::optional<MarMechanism> mar;
  int n = 2000;
  int trials = 100;
  int m_imputations = 20;
  SubmodelFamily family = SubmodelFamily::Gaussian;
  int mixture_k = 2;
  std::optional<UndirectedGraph> working_graph;  // estimated when absent
  double graph_threshold = 0.15;
  std::uint64_t seed = 1;
  int target = 1;
  Estimand estimand = Estimand::Median;
  bool allow_fallback = false;

  int dimension() const;
  static SimConfig from_json(const std::string& text);
};

// Fully observed draws from N(mu, omega^-1).
DataMatrix sample_ggm(const Eigen::MatrixXd& omega, const Eigen::VectorXd& mu,
                      int n, RandomStream& rng);

// Two-component location mixture with unit component covariance.
DataMatrix sample_mixture2(double w1, double w2, const Eigen::VectorXd& mu1,
                           const Eigen::VectorXd& mu2, int n,
                           RandomStream& rng);

// Independent per-cell masking at rate rho; each row's mask is redrawn
// until it leaves at least one cell observed.
DataMatrix mask_mcar(const DataMatrix& d, double rho, RandomStream& rng);

// Pattern-level masking: each row picks one of the 2^d - 1 non-empty
// response patterns with probability proportional to
// expit(beta0 + sum of the row's values observed under the pattern).
DataMatrix mask_mar(const DataMatrix& d, double beta0, RandomStream& rng);

struct TrialRow {
  std::string method;  // "mmg", "cc", "full"
  int trial = 0;
  double estimate = 0;
};

struct ExperimentSummary {
  std::vector<TrialRow> rows;
  struct Aggregate {
    std::string method;
    double mean = 0;
    double sd = 0;
    double bias = 0;  // mean(method) - mean(full)
  };
  std::vector<Aggregate> aggregates;
  int failed_trials = 0;
};

// Per trial: generate, mask, fit, impute m times, pool the per-dataset
// estimand; also records the complete-case and full-data estimands.
// Deterministic for a fixed config.
ExperimentSummary run_experiment(const SimConfig& cfg);

// summary.csv: method,trial,estimate.  aggregate.csv: method,mean,sd,bias.
void write_experiment(const ExperimentSummary& s,
                      const std::filesystem::path& outdir);

double column_median(const DataMatrix& d, int var, bool complete_rows_only);

}  // namespace mmg

#endif  // MMG_SIM_HPP_
