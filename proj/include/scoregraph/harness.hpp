#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scoregraph/classifier.hpp"
#include "scoregraph/graph.hpp"
#include "scoregraph/io.hpp"
#include "scoregraph/model.hpp"

namespace scoregraph {

struct ExperimentConfig {
  int N = 50;
  int C = 6;
  int R = 3;
  double true_theta = 0.2;
  double true_gamma = 0.3;
  std::vector<std::int64_t> edge_grid;  // empty: default_edge_grid(N)
  int trials = 100;
  std::uint64_t seed = 0;
  std::string method = "nr";  // nr | exact | distributed
  bool oracle = true;
  std::string distance = "absdiff";

  /// Full-scale profile: N = 300, 1000 trials per grid point.
  static ExperimentConfig paper_scale();

  std::vector<std::int64_t> grid() const;
  FamilySpec family_spec() const;
  /// Throws Error{InvalidConfig, InvalidAlphabet, EdgeBudgetOutOfRange}.
  void validate() const;
};

/// points values spread evenly from N (cycle) to N^2 - N (complete graph).
std::vector<std::int64_t> default_edge_grid(int num_nodes, int points = 8);

/// Keys: N, C, R, true_theta, true_gamma, edge_grid, trials, method, oracle,
/// distance. Unknown keys are rejected. The seed comes from the caller.
ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig defaults = {});
Json to_json(const ExperimentConfig& config);

struct TrialResult {
  std::int64_t n = 0;
  int trial = 0;
  double theta_err = 0.0;  // estimate - truth
  double gamma_err = 0.0;
  double misclass_rate = 0.0;
  double oracle_misclass_rate = 0.0;  // NaN when the oracle branch is off
  double wall_time = 0.0;             // seconds; not part of any persisted table
};

/// Deterministic in (config.seed, n, trial).
TrialResult run_trial(const ExperimentConfig& config, std::int64_t n, int trial);

struct SweepRow {
  std::int64_t n = 0;
  double rmse_theta = 0.0;
  double rmse_gamma = 0.0;
  double misclass = 0.0;
  double oracle_misclass = 0.0;
  double se_misclass = 0.0;  // standard error of the mean misclassification
};

struct SweepResult {
  std::vector<SweepRow> rows;       // sorted by n
  std::vector<TrialResult> trials;  // sorted by (n, trial)
};

/// Runs every (n, trial) task on a worker pool and reduces in task order.
/// threads <= 0 picks SCOREGRAPH_THREADS, or the hardware concurrency.
SweepResult run_sweep(const ExperimentConfig& config, int threads = 0);
SweepRow aggregate(std::int64_t n, const std::vector<TrialResult>& trials);

/// Header n,rmse_theta,rmse_gamma,misclass,oracle_misclass,se_misclass.
std::string sweep_csv(const std::vector<SweepRow>& rows);
/// Header n,trial,theta_err,gamma_err,misclass,oracle_misclass.
std::string trials_csv(const std::vector<TrialResult>& trials);

int worker_count(int requested);

struct CaseStudyConfig {
  int N = 10;
  int C = 3;
  int R = 3;
  std::int64_t n = 30;
  double true_theta = 0.2;
  double true_gamma = 0.3;
  std::uint64_t seed = 0;
  bool use_true_params = false;  // classify with the truth instead of the NR estimate
};

CaseStudyConfig case_study_config_from_json(const Json& j, CaseStudyConfig defaults = {});

struct CaseStudy {
  AlphabetSpec alphabet;
  ScoreGraph graph;
  Realization realization;
  Params params;  // the parameters the nodes were classified with
  std::vector<Classification> nodes;
};

CaseStudy case_study(const CaseStudyConfig& config);
/// Instance fields plus "theta", "gamma" and per-node
/// {"node", "soft", "map", "true", "correct"} rows, all 1-based.
Json case_study_json(const CaseStudy& study);

}  // namespace scoregraph
