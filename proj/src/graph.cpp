#include "scoregraph/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "scoregraph/errors.hpp"
#include "scoregraph/model.hpp"
#include "scoregraph/rng.hpp"

namespace scoregraph {

namespace {

// Inverse-CDF draw from a probability vector.
int draw_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs, StreamRng& rng) {
  const double u = rng.uniform() * probs.sum();
  double acc = 0.0;
  int last_positive = 0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    last_positive = static_cast<int>(k);
    acc += probs[k];
    if (u < acc) return static_cast<int>(k);
  }
  return last_positive;
}

void build_adjacency(int n, const std::vector<Edge>& edges, bool incoming,
                     std::vector<int>& offsets, std::vector<int>& index) {
  offsets.assign(n + 1, 0);
  for (const auto& e : edges) ++offsets[(incoming ? e.to : e.from) + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  index.assign(edges.size(), 0);
  std::vector<int> fill(offsets.begin(), offsets.end() - 1);
  for (int k = 0; k < static_cast<int>(edges.size()); ++k) {
    index[fill[incoming ? edges[k].to : edges[k].from]++] = k;
  }
}

}  // namespace

AlphabetSpec AlphabetSpec::numeric(int num_states, int num_scores) {
  AlphabetSpec a;
  a.num_states = num_states;
  a.num_scores = num_scores;
  for (int l = 1; l <= num_states; ++l) a.state_labels.push_back(std::to_string(l));
  for (int h = 1; h <= num_scores; ++h) a.score_labels.push_back(std::to_string(h));
  return a;
}

void AlphabetSpec::validate() const {
  if (num_states < 1) throw Error(ErrorCode::InvalidAlphabet, "C must be >= 1");
  if (num_scores < 1) throw Error(ErrorCode::InvalidAlphabet, "R must be >= 1");
  if (static_cast<int>(state_labels.size()) != num_states ||
      static_cast<int>(score_labels.size()) != num_scores) {
    throw Error(ErrorCode::InvalidAlphabet, "label count does not match alphabet size");
  }
  if (std::set(state_labels.begin(), state_labels.end()).size() != state_labels.size() ||
      std::set(score_labels.begin(), score_labels.end()).size() != score_labels.size()) {
    throw Error(ErrorCode::InvalidAlphabet, "labels must be distinct");
  }
}

int ScoreGraph::edge_index(NodeId from, NodeId to) const {
  if (from < 0 || from >= num_nodes_) return -1;
  const auto out = out_edges(from);
  // out-edges of a node are contiguous in the sorted edge list
  const auto it = std::lower_bound(out.begin(), out.end(), to,
                                   [this](int k, NodeId t) { return edges_[k].to < t; });
  return (it != out.end() && edges_[*it].to == to) ? *it : -1;
}

std::span<const int> ScoreGraph::in_edges(NodeId node) const {
  if (node < 0 || node >= num_nodes_) throw Error(ErrorCode::UnknownNode, std::to_string(node));
  return {in_index_.data() + in_offsets_[node],
          static_cast<std::size_t>(in_offsets_[node + 1] - in_offsets_[node])};
}

std::span<const int> ScoreGraph::out_edges(NodeId node) const {
  if (node < 0 || node >= num_nodes_) throw Error(ErrorCode::UnknownNode, std::to_string(node));
  return {out_index_.data() + out_offsets_[node],
          static_cast<std::size_t>(out_offsets_[node + 1] - out_offsets_[node])};
}

ScoreGraph build_score_graph(int num_nodes, std::vector<Edge> edges) {
  if (num_nodes < 1) throw Error(ErrorCode::IndexOutOfRange, "N must be >= 1");
  for (const auto& e : edges) {
    if (e.from < 0 || e.from >= num_nodes || e.to < 0 || e.to >= num_nodes) {
      throw Error(ErrorCode::IndexOutOfRange, "edge (" + std::to_string(e.from + 1) + "," +
                                                  std::to_string(e.to + 1) + ") outside 1.." +
                                                  std::to_string(num_nodes));
    }
    if (e.from == e.to) {
      throw Error(ErrorCode::SelfLoop, "node " + std::to_string(e.from + 1) + " evaluates itself");
    }
  }
  std::sort(edges.begin(), edges.end());
  const auto dup = std::adjacent_find(edges.begin(), edges.end());
  if (dup != edges.end()) {
    throw Error(ErrorCode::DuplicateEdge, "(" + std::to_string(dup->from + 1) + "," +
                                              std::to_string(dup->to + 1) + ") listed twice");
  }

  ScoreGraph g;
  g.num_nodes_ = num_nodes;
  g.edges_ = std::move(edges);
  build_adjacency(num_nodes, g.edges_, true, g.in_offsets_, g.in_index_);
  build_adjacency(num_nodes, g.edges_, false, g.out_offsets_, g.out_index_);
  for (NodeId i = 0; i < num_nodes; ++i) {
    if (g.in_offsets_[i + 1] == g.in_offsets_[i]) {
      throw Error(ErrorCode::IsolatedInNode,
                  "node " + std::to_string(i + 1) + " has no incoming evaluation");
    }
  }
  return g;
}

ScoreGraph random_score_graph(int num_nodes, std::int64_t num_edges, std::uint64_t seed) {
  const std::int64_t N = num_nodes;
  if (N < 2 || num_edges < N || num_edges > N * N - N) {
    throw Error(ErrorCode::EdgeBudgetOutOfRange,
                "n=" + std::to_string(num_edges) + " outside [N, N^2-N] for N=" +
                    std::to_string(num_nodes));
  }
  std::vector<Edge> edges;
  edges.reserve(num_edges);
  for (NodeId i = 0; i < num_nodes; ++i) edges.push_back({i, (i + 1) % num_nodes});

  // Off-cycle pairs, coded as from * N + to.
  std::vector<std::int64_t> candidates;
  candidates.reserve(N * N - 2 * N);
  for (std::int64_t i = 0; i < N; ++i) {
    for (std::int64_t j = 0; j < N; ++j) {
      if (i != j && j != (i + 1) % N) candidates.push_back(i * N + j);
    }
  }
  // Partial Fisher-Yates: the first (n - N) slots become a uniform subset.
  StreamRng rng{static_cast<std::uint64_t>(StreamTag::Graph), seed,
                static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(num_edges)};
  const auto extra = static_cast<std::size_t>(num_edges - N);
  for (std::size_t k = 0; k < extra; ++k) {
    const auto pick = k + rng.below(candidates.size() - k);
    std::swap(candidates[k], candidates[pick]);
    edges.push_back({static_cast<NodeId>(candidates[k] / N), static_cast<NodeId>(candidates[k] % N)});
  }
  return build_score_graph(num_nodes, std::move(edges));
}

void Realization::validate(const ScoreGraph& graph, const AlphabetSpec& alphabet) const {
  if (static_cast<int>(scores.size()) != graph.num_edges()) {
    throw Error(ErrorCode::IndexOutOfRange, "score count does not match edge count");
  }
  if (!states.empty() && static_cast<int>(states.size()) != graph.num_nodes()) {
    throw Error(ErrorCode::IndexOutOfRange, "state count does not match node count");
  }
  for (int s : states) {
    if (s < 0 || s >= alphabet.num_states) throw Error(ErrorCode::IndexOutOfRange, "state index");
  }
  for (int h : scores) {
    if (h < 0 || h >= alphabet.num_scores) throw Error(ErrorCode::IndexOutOfRange, "score index");
  }
}

NodeStats compute_node_stats(const ScoreGraph& graph, const Realization& realization,
                             int num_scores, NodeId node) {
  if (node < 0 || node >= graph.num_nodes()) {
    throw Error(ErrorCode::UnknownNode, std::to_string(node + 1));
  }
  const int R = num_scores;
  NodeStats s;
  s.node = node;
  s.mutual_counts = Eigen::MatrixXi::Zero(R, R);
  s.in_counts = Eigen::VectorXi::Zero(R);
  s.out_counts = Eigen::VectorXi::Zero(R);
  s.total_in_counts = Eigen::VectorXi::Zero(R);

  for (int k : graph.in_edges(node)) {
    const NodeId j = graph.edges()[k].from;
    const int received = realization.scores[k];
    ++s.total_in_counts[received];
    const int back = graph.edge_index(node, j);
    if (back >= 0) {
      ++s.mutual_counts(realization.scores[back], received);
    } else {
      ++s.in_counts[received];
    }
  }
  for (int k : graph.out_edges(node)) {
    if (!graph.has_edge(graph.edges()[k].to, node)) ++s.out_counts[realization.scores[k]];
  }
  return s;
}

std::vector<NodeStats> compute_all_node_stats(const ScoreGraph& graph,
                                              const Realization& realization, int num_scores) {
  std::vector<NodeStats> all;
  all.reserve(graph.num_nodes());
  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    all.push_back(compute_node_stats(graph, realization, num_scores, i));
  }
  return all;
}

Realization sample_realization(const ScoreGraph& graph, const ModelFamily& family,
                               const Params& params, std::uint64_t seed) {
  family.check_feasible(params);
  const ScoreTensorXd p = score_tensor(family, params.theta);
  const Eigen::VectorXd prior = prior_vector(family, params.gamma);
  const int R = family.num_scores();

  Realization r;
  r.states.resize(graph.num_nodes());
  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    StreamRng rng{static_cast<std::uint64_t>(StreamTag::State), seed,
                  static_cast<std::uint64_t>(i)};
    r.states[i] = draw_categorical(prior, rng);
  }
  r.scores.resize(graph.num_edges());
  Eigen::VectorXd fiber(R);
  for (int k = 0; k < graph.num_edges(); ++k) {
    const auto& e = graph.edges()[k];
    for (int h = 0; h < R; ++h) fiber[h] = p(h, r.states[e.from], r.states[e.to]);
    StreamRng rng{static_cast<std::uint64_t>(StreamTag::Score), seed,
                  static_cast<std::uint64_t>(e.from), static_cast<std::uint64_t>(e.to)};
    r.scores[k] = draw_categorical(fiber, rng);
  }
  return r;
}

}  // namespace scoregraph
