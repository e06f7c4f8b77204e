#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "scoregraph/classifier.hpp"
#include "scoregraph/estimator.hpp"
#include "scoregraph/graph.hpp"
#include "scoregraph/model.hpp"

namespace scoregraph {

/// Time-varying directed communication graph. edges_at(t) excludes the
/// implicit self-loops.
struct CommSchedule {
  int num_nodes = 0;
  int window = 1;  // Q
  std::string kind;
  std::int64_t period = 0;  // 0 when the schedule is not periodic
  std::function<std::vector<Edge>(std::int64_t t)> edges_at;
};

enum class ScheduleKind {
  Static,          // directed cycle 0->1->...->N-1->0 at every step
  Complete,        // complete digraph at every step
  PeriodicGossip,  // edge (i, i+1 mod N) only at t = i mod N
  Random,          // per window: random Hamiltonian cycle spread over the Q steps plus extras
};

ScheduleKind parse_schedule_kind(const std::string& name);

/// Throws Error{ConnectivityViolation} when the result fails the Q-window
/// strong connectivity check.
CommSchedule make_schedule(ScheduleKind kind, int num_nodes, int window, std::uint64_t seed = 0);

/// Repeats edge_sets periodically. Throws Error{ConnectivityViolation}.
CommSchedule custom_schedule(int num_nodes, int window, std::vector<std::vector<Edge>> edge_sets);

/// Tarjan's algorithm; returns one component id per node.
std::vector<int> strongly_connected_components(int num_nodes, const std::vector<Edge>& edges);
bool is_strongly_connected(int num_nodes, const std::vector<Edge>& edges);

struct ConnectivityCheck {
  bool ok = true;
  std::int64_t first_violating_window = -1;
};

/// Checks every complete window [wQ, (w+1)Q - 1] with (w+1)Q <= horizon.
ConnectivityCheck check_assumption1(const CommSchedule& schedule, std::int64_t horizon);

/// Per-node received-score counts, handed out only through read(). With
/// recording on, every (reader, owner) access is logged.
class LocalStatsStore {
 public:
  explicit LocalStatsStore(std::vector<Eigen::VectorXi> counts) : counts_(std::move(counts)) {}
  static LocalStatsStore from_realization(const ScoreGraph& graph, const Realization& realization,
                                          int num_scores);

  int num_nodes() const { return static_cast<int>(counts_.size()); }
  const Eigen::VectorXi& read(NodeId reader, NodeId owner) const;

  void set_recording(bool on) { recording_ = on; }
  const std::vector<std::pair<NodeId, NodeId>>& accesses() const { return accesses_; }

 private:
  std::vector<Eigen::VectorXi> counts_;
  bool recording_ = false;
  mutable std::vector<std::pair<NodeId, NodeId>> accesses_;
};

struct AgentState {
  NodeId node = 0;
  Eigen::VectorXd estimate;  // flattened [theta; gamma], x = u / weight
  Eigen::VectorXd mass;      // push-sum numerator u
  Eigen::VectorXd tracker;   // y
  double weight = 1.0;
};

enum class StepRule { Diminishing, Constant };

struct DistributedOptions {
  StepRule step_rule = StepRule::Diminishing;
  double step_a = 0.5;  // diminishing: a / (t + b)
  double step_b = 10.0;
  double constant_step = 0.05;
  // Caps each agent's own move per round to this fraction of the box width
  // (per coordinate). Only the applied step is scaled; the tracker is not.
  double max_move = 0.005;
  double consensus_tol = 1e-6;
  double grad_tol = 1e-6;
  int max_steps = 50'000;
  int trace_every = 1;
  int seed_grid = 8;  // seeding grid, points per parameter component
  // Push-sum rounds used to average the grid scores before the gradient
  // phase and the final objective values after it. 0 leaves every agent
  // with its local values. Negative means 40 * N * Q.
  int seed_rounds = -1;
  // Communication rounds per gradient evaluation. Between evaluations the
  // agents only mix; the step counter of the step rule advances once per
  // evaluation. 0 means N * Q.
  int mix_rounds = 0;
  // Tracking runs started from the best-ranked grid cells; max_steps applies
  // to each run.
  int restarts = 8;
  std::function<void(std::int64_t step, const std::vector<AgentState>&)> on_round;
};

struct ResidualRow {
  std::int64_t step;
  double max_disagreement;
  double mean_objective;
};

struct DistributedResult {
  std::vector<EstimateReport> reports;  // one per agent
  std::vector<ResidualRow> trace;
  bool converged = false;
  std::int64_t steps = 0;
};

/// Push-sum gradient tracking on min -(1/N) sum_i g(.; n_i). Agent i reads
/// only its own counts and the messages of its current in-neighbors.
/// Throws Error{ScheduleInvalid}.
DistributedResult run_distributed_nr(const LocalStatsStore& stats, const ModelFamily& family,
                                     const CommSchedule& schedule,
                                     const DistributedOptions& options = {});
DistributedResult run_distributed_nr(const ScoreGraph& graph, const Realization& realization,
                                     const ModelFamily& family, const CommSchedule& schedule,
                                     const DistributedOptions& options = {});

/// Each node classifies with its own final estimate, or with the agents'
/// mean estimate when use_mean is set.
std::vector<Classification> classify_after_consensus(const ScoreGraph& graph,
                                                     const Realization& realization,
                                                     const ModelFamily& family,
                                                     const std::vector<EstimateReport>& reports,
                                                     bool use_mean = false);

}  // namespace scoregraph
