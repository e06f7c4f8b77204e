#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "scoregraph/graph.hpp"
#include "scoregraph/model.hpp"

namespace scoregraph {

enum class EstimateMethod { Exact, NrCentralized, NrDistributed };
std::string to_string(EstimateMethod m);

struct TraceEntry {
  int restart;
  int iteration;
  double objective;
  Params params;
};

struct EstimateReport {
  Params estimate;
  double objective = 0.0;
  std::vector<TraceEntry> trace;
  EstimateMethod method = EstimateMethod::NrCentralized;
  bool converged = false;
  int restarts_used = 0;
  int best_restart = 0;
};

struct EstimateOptions {
  int grid_theta = 8;  // restart cells per theta component
  int grid_gamma = 8;  // restart cells per gamma component
  double tol = 1e-6;   // projected-gradient norm of the per-node mean objective
  int max_iters = 500;
  bool keep_trace = true;
};

inline constexpr std::uint64_t kExactTermBudget = 10'000'000;

/// log L by summing over all C^N joint states.
/// Throws Error{BudgetExceeded, InfeasibleParams}.
double exact_log_likelihood(const ScoreGraph& graph, const Realization& realization,
                            const ModelFamily& family, const Params& params,
                            std::uint64_t term_budget = kExactTermBudget);

/// g(theta, gamma; n) = log sum_l p_l prod_h (sum_m p_{h|m,l} p_m)^{n_h}.
double node_relaxed_term(const Eigen::VectorXi& received_counts, const ModelFamily& family,
                         const Params& params);

/// Node-based relaxed log-likelihood sum_i g(theta, gamma; n_i), with its
/// gradient. Nodes with equal count vectors share one evaluation.
class RelaxedObjective {
 public:
  explicit RelaxedObjective(const std::vector<Eigen::VectorXi>& received_counts);
  static RelaxedObjective from_realization(const ScoreGraph& graph, const Realization& realization,
                                           int num_scores);

  int num_nodes() const { return num_nodes_; }
  double value(const ModelFamily& family, const Params& params) const;
  /// Gradient with respect to the flattened [theta; gamma].
  std::pair<double, Eigen::VectorXd> value_and_gradient(const ModelFamily& family,
                                                        const Params& params) const;

 private:
  std::vector<std::pair<Eigen::VectorXi, int>> groups_;  // counts, multiplicity
  int num_nodes_ = 0;
};

double nr_log_likelihood(const ScoreGraph& graph, const Realization& realization,
                         const ModelFamily& family, const Params& params);

/// Multi-start projected gradient on the exact likelihood, gradients by
/// finite differences. Small instances only.
EstimateReport estimate_exact(const ScoreGraph& graph, const Realization& realization,
                              const ModelFamily& family, const EstimateOptions& options = {});

/// Multi-start projected gradient on the relaxed likelihood.
EstimateReport estimate_nr(const ScoreGraph& graph, const Realization& realization,
                           const ModelFamily& family, const EstimateOptions& options = {});
EstimateReport estimate_nr(const RelaxedObjective& objective, const ModelFamily& family,
                           const EstimateOptions& options = {});

/// Best cell center of a restart grid over the family's search box.
Params grid_best(const std::function<double(const Params&)>& objective, const ModelFamily& family,
                 int grid_theta, int grid_gamma);

}  // namespace scoregraph
