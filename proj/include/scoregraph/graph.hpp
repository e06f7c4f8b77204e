#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace scoregraph {

struct ModelFamily;
struct Params;

/// Node, state and score indices are 0-based throughout the library. The
/// JSON instance format and CLI output shift them to 1-based.
using NodeId = int;

struct Edge {
  NodeId from;  // evaluator
  NodeId to;    // evaluated
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct AlphabetSpec {
  int num_states = 1;
  int num_scores = 1;
  std::vector<std::string> state_labels;
  std::vector<std::string> score_labels;

  /// Labels default to "1".."C" / "1".."R".
  static AlphabetSpec numeric(int num_states, int num_scores);
  void validate() const;
};

/// Directed evaluation topology. Edges are kept sorted by (from, to) and
/// every node has at least one evaluator.
class ScoreGraph {
 public:
  ScoreGraph() = default;

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Position of (from, to) in edges(), or -1.
  int edge_index(NodeId from, NodeId to) const;
  bool has_edge(NodeId from, NodeId to) const { return edge_index(from, to) >= 0; }

  /// Edge indices of the in/out edges of a node.
  std::span<const int> in_edges(NodeId node) const;
  std::span<const int> out_edges(NodeId node) const;

  int in_degree(NodeId node) const { return static_cast<int>(in_edges(node).size()); }
  int out_degree(NodeId node) const { return static_cast<int>(out_edges(node).size()); }

  friend ScoreGraph build_score_graph(int num_nodes, std::vector<Edge> edges);

 private:
  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> in_offsets_, in_index_;
  std::vector<int> out_offsets_, out_index_;
};

/// Validates and canonicalizes an edge list.
/// Throws Error{IndexOutOfRange, SelfLoop, DuplicateEdge, IsolatedInNode}.
ScoreGraph build_score_graph(int num_nodes, std::vector<Edge> edges);

/// Directed Hamiltonian cycle 0->1->...->N-1->0 plus (num_edges - N) distinct
/// extra edges drawn uniformly from the remaining ordered pairs.
ScoreGraph random_score_graph(int num_nodes, std::int64_t num_edges, std::uint64_t seed);

/// Hidden states and observed scores. scores[e] belongs to graph.edges()[e].
struct Realization {
  std::vector<int> states;
  std::vector<int> scores;

  void validate(const ScoreGraph& graph, const AlphabetSpec& alphabet) const;
};

/// Per-node sufficient statistics.
struct NodeStats {
  NodeId node = 0;
  Eigen::MatrixXi mutual_counts;  // (h, k): node gave r_h, received r_k
  Eigen::VectorXi in_counts;      // received from non-reciprocated evaluators
  Eigen::VectorXi out_counts;     // given to nodes that do not evaluate back
  Eigen::VectorXi total_in_counts;
};

NodeStats compute_node_stats(const ScoreGraph& graph, const Realization& realization,
                             int num_scores, NodeId node);

std::vector<NodeStats> compute_all_node_stats(const ScoreGraph& graph,
                                              const Realization& realization, int num_scores);

/// States i.i.d. from the prior, then each score from the kernel given both
/// endpoint states. Each node and each edge (keyed by its endpoints) has its
/// own random stream, so growing the graph leaves earlier draws untouched.
Realization sample_realization(const ScoreGraph& graph, const ModelFamily& family,
                               const Params& params, std::uint64_t seed);

}  // namespace scoregraph
