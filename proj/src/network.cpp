#include "scoregraph/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scoregraph/errors.hpp"
#include "scoregraph/optimize.hpp"
#include "scoregraph/rng.hpp"

namespace scoregraph {

namespace {

constexpr std::int64_t kMaxValidationHorizon = 1'000'000;

std::int64_t validation_horizon(const CommSchedule& s) {
  const std::int64_t q = s.window;
  if (s.period > 0) return std::min(std::lcm(s.period, q), std::max(q, kMaxValidationHorizon / q * q));
  return 32 * q;
}

void require_assumption1(const CommSchedule& s) {
  const auto check = check_assumption1(s, validation_horizon(s));
  if (!check.ok) {
    throw Error(ErrorCode::ConnectivityViolation,
                s.kind + " schedule with Q=" + std::to_string(s.window) +
                    " is not strongly connected over window " +
                    std::to_string(check.first_violating_window));
  }
}

std::vector<Edge> random_window_edges(int n, int q, std::uint64_t seed, std::int64_t window,
                                      std::int64_t slot) {
  StreamRng rng{static_cast<std::uint64_t>(StreamTag::Schedule), seed,
                static_cast<std::uint64_t>(window)};
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int k = n - 1; k > 0; --k) std::swap(perm[k], perm[rng.below(k + 1)]);
  std::vector<Edge> out;
  if (n < 2) return out;
  // every edge of a random Hamiltonian cycle lands in some slot of the window
  for (int k = 0; k < n; ++k) {
    const auto at = static_cast<std::int64_t>(rng.below(q));
    if (at == slot) out.push_back({perm[k], perm[(k + 1) % n]});
  }
  // plus about one random extra edge per node and step
  for (std::int64_t s = 0; s < q; ++s) {
    for (int k = 0; k < n; ++k) {
      const int from = static_cast<int>(rng.below(n));
      const int to = static_cast<int>(rng.below(n));
      if (s == slot && from != to) out.push_back({from, to});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "static") return ScheduleKind::Static;
  if (name == "complete") return ScheduleKind::Complete;
  if (name == "gossip" || name == "periodic_gossip") return ScheduleKind::PeriodicGossip;
  if (name == "random") return ScheduleKind::Random;
  throw Error(ErrorCode::InvalidConfig, "unknown schedule kind '" + name + "'");
}

CommSchedule make_schedule(ScheduleKind kind, int num_nodes, int window, std::uint64_t seed) {
  if (num_nodes < 1 || window < 1) {
    throw Error(ErrorCode::InvalidConfig, "schedules need N >= 1 and Q >= 1");
  }
  CommSchedule s;
  s.num_nodes = num_nodes;
  s.window = window;
  const int n = num_nodes;
  switch (kind) {
    case ScheduleKind::Static: {
      s.kind = "static";
      s.period = 1;
      std::vector<Edge> cycle;
      for (int i = 0; n > 1 && i < n; ++i) cycle.push_back({i, (i + 1) % n});
      s.edges_at = [cycle](std::int64_t) { return cycle; };
      break;
    }
    case ScheduleKind::Complete: {
      s.kind = "complete";
      s.period = 1;
      std::vector<Edge> all;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i != j) all.push_back({i, j});
        }
      }
      s.edges_at = [all](std::int64_t) { return all; };
      break;
    }
    case ScheduleKind::PeriodicGossip: {
      s.kind = "gossip";
      s.period = n;
      s.edges_at = [n](std::int64_t t) {
        std::vector<Edge> e;
        const int i = static_cast<int>(t % n);
        if (n > 1) e.push_back({i, (i + 1) % n});
        return e;
      };
      break;
    }
    case ScheduleKind::Random: {
      s.kind = "random";
      s.period = 0;
      s.edges_at = [n, window, seed](std::int64_t t) {
        return random_window_edges(n, window, seed, t / window, t % window);
      };
      break;
    }
  }
  require_assumption1(s);
  return s;
}

CommSchedule custom_schedule(int num_nodes, int window, std::vector<std::vector<Edge>> edge_sets) {
  if (num_nodes < 1 || window < 1 || edge_sets.empty()) {
    throw Error(ErrorCode::ConnectivityViolation, "custom schedule needs N, Q >= 1 and edge sets");
  }
  for (const auto& set : edge_sets) {
    for (const auto& e : set) {
      if (e.from < 0 || e.from >= num_nodes || e.to < 0 || e.to >= num_nodes) {
        throw Error(ErrorCode::IndexOutOfRange, "schedule edge outside the node range");
      }
    }
  }
  CommSchedule s;
  s.num_nodes = num_nodes;
  s.window = window;
  s.kind = "custom";
  s.period = static_cast<std::int64_t>(edge_sets.size());
  s.edges_at = [sets = std::move(edge_sets)](std::int64_t t) {
    return sets[static_cast<std::size_t>(t % static_cast<std::int64_t>(sets.size()))];
  };
  require_assumption1(s);
  return s;
}

std::vector<int> strongly_connected_components(int num_nodes, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> adj(num_nodes);
  for (const auto& e : edges) adj[e.from].push_back(e.to);

  std::vector<int> index(num_nodes, -1), low(num_nodes, 0), comp(num_nodes, -1);
  std::vector<bool> on_stack(num_nodes, false);
  std::vector<int> stack;
  int next_index = 0;
  int next_comp = 0;

  // explicit call stack of (node, next child position)
  std::vector<std::pair<int, std::size_t>> call;
  for (int root = 0; root < num_nodes; ++root) {
    if (index[root] >= 0) continue;
    call.push_back({root, 0});
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      if (pos == 0 && index[v] < 0) {
        index[v] = low[v] = next_index++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      if (pos < adj[v].size()) {
        const int w = adj[v][pos++];
        if (index[w] < 0) {
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = next_comp;
        } while (w != v);
        ++next_comp;
      }
      const int done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }
  return comp;
}

bool is_strongly_connected(int num_nodes, const std::vector<Edge>& edges) {
  if (num_nodes <= 1) return true;
  const auto comp = strongly_connected_components(num_nodes, edges);
  return std::all_of(comp.begin(), comp.end(), [&](int c) { return c == comp[0]; });
}

ConnectivityCheck check_assumption1(const CommSchedule& schedule, std::int64_t horizon) {
  ConnectivityCheck out;
  const std::int64_t q = schedule.window;
  for (std::int64_t w = 0; (w + 1) * q <= horizon; ++w) {
    std::vector<Edge> joint;
    for (std::int64_t t = w * q; t < (w + 1) * q; ++t) {
      const auto e = schedule.edges_at(t);
      joint.insert(joint.end(), e.begin(), e.end());
    }
    if (!is_strongly_connected(schedule.num_nodes, joint)) {
      out.ok = false;
      out.first_violating_window = w;
      return out;
    }
  }
  return out;
}

LocalStatsStore LocalStatsStore::from_realization(const ScoreGraph& graph,
                                                  const Realization& realization, int num_scores) {
  std::vector<Eigen::VectorXi> counts(graph.num_nodes(), Eigen::VectorXi::Zero(num_scores));
  for (int k = 0; k < graph.num_edges(); ++k) ++counts[graph.edges()[k].to][realization.scores[k]];
  return LocalStatsStore(std::move(counts));
}

const Eigen::VectorXi& LocalStatsStore::read(NodeId reader, NodeId owner) const {
  if (owner < 0 || owner >= num_nodes()) throw Error(ErrorCode::UnknownNode, std::to_string(owner));
  if (recording_) accesses_.emplace_back(reader, owner);
  return counts_[owner];
}

namespace {

// Push-sum averaging of one vector per agent; returns the ratio estimates.
std::vector<Eigen::VectorXd> push_sum_average(std::vector<Eigen::VectorXd> value,
                                              const CommSchedule& schedule, std::int64_t rounds) {
  const int n = static_cast<int>(value.size());
  std::vector<double> weight(n, 1.0), next_weight(n);
  std::vector<Eigen::VectorXd> next_value(n);
  std::vector<int> out_size(n);
  for (std::int64_t t = 0; t < rounds; ++t) {
    const auto edges = schedule.edges_at(t);
    std::fill(out_size.begin(), out_size.end(), 1);
    for (const auto& e : edges) ++out_size[e.from];
    for (int i = 0; i < n; ++i) {
      next_value[i] = value[i] / out_size[i];
      next_weight[i] = weight[i] / out_size[i];
    }
    for (const auto& e : edges) {
      next_value[e.to] += value[e.from] / out_size[e.from];
      next_weight[e.to] += weight[e.from] / out_size[e.from];
    }
    std::swap(value, next_value);
    std::swap(weight, next_weight);
  }
  for (int i = 0; i < n; ++i) value[i] /= weight[i];
  return value;
}

// Indices sorted by decreasing score; ties keep the lower index first.
std::vector<int> ranking(const Eigen::VectorXd& score) {
  std::vector<int> order(static_cast<std::size_t>(score.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score[a] > score[b]; });
  return order;
}

struct Phase {
  std::vector<AgentState> agents;
  std::vector<double> local_value;
  std::vector<ResidualRow> trace;
  bool converged = false;
  std::int64_t steps = 0;
};

}  // namespace

DistributedResult run_distributed_nr(const LocalStatsStore& stats, const ModelFamily& family,
                                     const CommSchedule& schedule,
                                     const DistributedOptions& options) {
  const int n = stats.num_nodes();
  if (schedule.num_nodes != n || !schedule.edges_at) {
    throw Error(ErrorCode::ScheduleInvalid, "schedule does not cover the agents");
  }
  if (!check_assumption1(schedule, validation_horizon(schedule)).ok) {
    throw Error(ErrorCode::ScheduleInvalid, "schedule violates Q-window strong connectivity");
  }
  const ParamBox& box = family.search;
  const Eigen::VectorXd lo = box.lower();
  const Eigen::VectorXd hi = box.upper();
  const std::int64_t consensus_rounds =
      options.seed_rounds >= 0 ? options.seed_rounds
                               : 40 * static_cast<std::int64_t>(n) * schedule.window;
  const std::int64_t mix = options.mix_rounds > 0
                               ? options.mix_rounds
                               : static_cast<std::int64_t>(n) * schedule.window;

  // Each agent only ever sees its own counts.
  std::vector<RelaxedObjective> local;
  local.reserve(n);
  for (NodeId i = 0; i < n; ++i) local.emplace_back(std::vector<Eigen::VectorXi>{stats.read(i, i)});

  // Local cost f_i = -g_i; keep its gradient for the tracking correction.
  const auto local_eval = [&](NodeId i, const Eigen::VectorXd& z) {
    auto [v, g] = local[i].value_and_gradient(family, box.unflatten(z));
    return std::make_pair(v, Eigen::VectorXd(-g));
  };

  // Seeding: every agent scores the grid with its local g_i and the scores
  // are averaged over the network, so agents rank the cells alike.
  std::vector<int> shape(box.theta.size(), options.seed_grid);
  shape.insert(shape.end(), box.gamma.size(), options.seed_grid);
  const auto cells = grid_cell_centers(lo, hi, shape, box.log_axes());
  std::vector<Eigen::VectorXd> grid_score(n, Eigen::VectorXd(static_cast<Eigen::Index>(cells.size())));
  for (NodeId i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = local[i].value(family, box.unflatten(cells[c]));
      // -inf would poison the average; a large finite penalty keeps the order
      grid_score[i][static_cast<Eigen::Index>(c)] = std::isfinite(v) ? v : -1e300 / n;
    }
  }
  grid_score = push_sum_average(std::move(grid_score), schedule, consensus_rounds);
  std::vector<std::vector<int>> order(n);
  for (NodeId i = 0; i < n; ++i) order[i] = ranking(grid_score[i]);

  const auto dims = lo.size();
  const Eigen::VectorXd width = (hi - lo).cwiseMax(1e-300);

  const auto track = [&](int restart, std::int64_t step_offset) {
    Phase ph;
    ph.agents.resize(n);
    ph.local_value.resize(n);
    std::vector<Eigen::VectorXd> last_grad(n);
    for (NodeId i = 0; i < n; ++i) {
      AgentState& a = ph.agents[i];
      a.node = i;
      a.estimate = cells[order[i][restart]];
      a.mass = a.estimate;
      a.weight = 1.0;
      std::tie(ph.local_value[i], last_grad[i]) = local_eval(i, a.estimate);
      a.tracker = last_grad[i];
    }
    auto& agents = ph.agents;
    std::vector<Eigen::VectorXd> u(n), y(n), outgoing(n);
    std::vector<double> v(n);
    std::vector<int> out_size(n);

    for (std::int64_t t = 0; t < options.max_steps; ++t) {
      const bool gradient_round = t % mix == 0;
      const double k = static_cast<double>(t / mix);
      const double alpha = options.step_rule == StepRule::Constant
                               ? options.constant_step
                               : options.step_a / (k + options.step_b);
      const auto edges = schedule.edges_at(t);
      std::fill(out_size.begin(), out_size.end(), 1);
      for (const auto& e : edges) ++out_size[e.from];

      for (NodeId i = 0; i < n; ++i) {
        const AgentState& a = agents[i];
        if (!gradient_round) {
          outgoing[i] = a.mass;
          continue;
        }
        // step/weight is the move of the agent's estimate before mixing
        double step = alpha;
        const double move =
            ((alpha / a.weight) * a.tracker).cwiseQuotient(width).lpNorm<Eigen::Infinity>();
        if (options.max_move > 0.0 && move > options.max_move) step *= options.max_move / move;
        outgoing[i] = a.mass - step * a.tracker;
      }
      for (NodeId i = 0; i < n; ++i) {
        const double share = 1.0 / out_size[i];
        u[i] = share * outgoing[i];
        v[i] = share * agents[i].weight;
        y[i] = share * agents[i].tracker;
      }
      for (const auto& e : edges) {
        const AgentState& a = agents[e.from];
        const double share = 1.0 / out_size[e.from];
        u[e.to] += share * outgoing[e.from];
        v[e.to] += share * a.weight;
        y[e.to] += share * a.tracker;
      }

      // Round barrier: every agent commits from the messages it received.
      const bool evaluate = (t + 1) % mix == 0;
      for (NodeId i = 0; i < n; ++i) {
        AgentState& a = agents[i];
        a.weight = v[i];
        a.estimate = (u[i] / v[i]).cwiseMax(lo).cwiseMin(hi);
        a.mass = v[i] * a.estimate;
        if (!evaluate) {
          a.tracker = y[i];
          continue;
        }
        auto [value, grad] = local_eval(i, a.estimate);
        a.tracker = y[i] + grad - last_grad[i];
        last_grad[i] = std::move(grad);
        ph.local_value[i] = value;
      }
      ph.steps = t + 1;

      double disagreement = 0.0;
      for (Eigen::Index c = 0; c < dims; ++c) {
        double mn = agents[0].estimate[c], mx = mn;
        for (const auto& a : agents) {
          mn = std::min(mn, a.estimate[c]);
          mx = std::max(mx, a.estimate[c]);
        }
        disagreement = std::max(disagreement, mx - mn);
      }
      double stationarity = 0.0;
      for (const auto& a : agents) {
        const Eigen::VectorXd moved = (a.estimate - a.tracker / a.weight).cwiseMax(lo).cwiseMin(hi);
        stationarity = std::max(stationarity, (moved - a.estimate).norm());
      }
      const bool done = evaluate && disagreement <= options.consensus_tol &&
                        stationarity <= options.grad_tol;

      if (options.trace_every > 0 && ((t + 1) % options.trace_every == 0 || done)) {
        double mean = 0.0;
        for (double x : ph.local_value) mean += x;
        ph.trace.push_back({step_offset + t + 1, disagreement, mean / n});
      }
      if (options.on_round) options.on_round(step_offset + t + 1, agents);
      if (done) {
        ph.converged = true;
        break;
      }
    }
    return ph;
  };

  const int restarts = std::clamp(options.restarts, 1, static_cast<int>(cells.size()));
  std::vector<Phase> phases;
  DistributedResult result;
  for (int r = 0; r < restarts; ++r) {
    phases.push_back(track(r, result.steps));
    result.steps += phases.back().steps;
    result.trace.insert(result.trace.end(), phases.back().trace.begin(), phases.back().trace.end());
  }

  // Agents average their local objective values per restart and each keeps
  // the restart with the best network mean (lowest index on ties).
  std::vector<int> pick(n, 0);
  if (restarts > 1) {
    std::vector<Eigen::VectorXd> finals(n, Eigen::VectorXd(restarts));
    for (NodeId i = 0; i < n; ++i) {
      for (int r = 0; r < restarts; ++r) finals[i][r] = phases[r].local_value[i];
    }
    finals = push_sum_average(std::move(finals), schedule, consensus_rounds);
    for (NodeId i = 0; i < n; ++i) pick[i] = ranking(finals[i]).front();
  }

  result.converged = true;
  result.reports.reserve(n);
  for (NodeId i = 0; i < n; ++i) {
    const Phase& ph = phases[pick[i]];
    result.converged = result.converged && ph.converged;
    EstimateReport r;
    r.method = EstimateMethod::NrDistributed;
    r.estimate = box.unflatten(ph.agents[i].estimate);
    r.objective = ph.local_value[i];  // the agent's own g_i at its estimate
    r.converged = ph.converged;
    r.restarts_used = restarts;
    r.best_restart = pick[i];
    result.reports.push_back(std::move(r));
  }
  return result;
}

DistributedResult run_distributed_nr(const ScoreGraph& graph, const Realization& realization,
                                     const ModelFamily& family, const CommSchedule& schedule,
                                     const DistributedOptions& options) {
  return run_distributed_nr(
      LocalStatsStore::from_realization(graph, realization, family.num_scores()), family, schedule,
      options);
}

std::vector<Classification> classify_after_consensus(const ScoreGraph& graph,
                                                     const Realization& realization,
                                                     const ModelFamily& family,
                                                     const std::vector<EstimateReport>& reports,
                                                     bool use_mean) {
  if (static_cast<int>(reports.size()) != graph.num_nodes()) {
    throw Error(ErrorCode::InvalidConfig, "one report per node required");
  }
  std::optional<NeighborFactors> shared;
  if (use_mean) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(family.search.size());
    for (const auto& r : reports) mean += family.search.flatten(r.estimate);
    mean /= static_cast<double>(reports.size());
    shared = NeighborFactors::compute(family, family.search.unflatten(mean));
  }
  std::vector<Classification> out;
  out.reserve(graph.num_nodes());
  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    const NodeStats s = compute_node_stats(graph, realization, family.num_scores(), i);
    out.push_back(shared ? soft_classify(s, *shared)
                         : soft_classify(s, family, reports[i].estimate));
  }
  return out;
}

}  // namespace scoregraph
