#include "scoregraph/classifier.hpp"

#include <cmath>
#include <limits>

#include "scoregraph/errors.hpp"

namespace scoregraph {

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double top = x.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((x.array() - top).exp().sum());
}

Eigen::VectorXd log_mat_vec(const Eigen::Ref<const Eigen::MatrixXd>& log_a,
                            const Eigen::Ref<const Eigen::VectorXd>& log_x) {
  Eigen::VectorXd out(log_a.rows());
  for (Eigen::Index r = 0; r < log_a.rows(); ++r) {
    out[r] = log_sum_exp(log_a.row(r).transpose() + log_x);
  }
  return out;
}

NeighborFactors NeighborFactors::compute(const ModelFamily& family, const Params& params) {
  family.check_feasible(params);
  const ScoreTensorXd log_P = log_score_tensor(family, params.theta);
  const int C = family.num_states();
  const int R = family.num_scores();

  NeighborFactors f;
  f.log_prior = log_prior_vector(family, params.gamma);
  f.log_received.resize(R, C);
  f.log_given.resize(R, C);
  f.log_mutual.resize(R * R, C);
  for (int h = 0; h < R; ++h) {
    // slice(h)(l, m) = log p_{h|l,m}
    f.log_received.row(h) = log_mat_vec(log_P.slice(h).transpose(), f.log_prior).transpose();
    f.log_given.row(h) = log_mat_vec(log_P.slice(h), f.log_prior).transpose();
    for (int k = 0; k < R; ++k) {
      // sum_m p_{h|l,m} p_{k|m,l} p_m
      f.log_mutual.row(h * R + k) =
          log_mat_vec(log_P.slice(h) + log_P.slice(k).transpose(), f.log_prior).transpose();
    }
  }
  return f;
}

namespace {

// count * log(x), with 0 * (-inf) taken as 0.
void accumulate(Eigen::VectorXd& acc, int count, const Eigen::Ref<const Eigen::RowVectorXd>& logs) {
  if (count == 0) return;
  acc += static_cast<double>(count) * logs.transpose();
}

}  // namespace

Classification soft_classify(const NodeStats& stats, const NeighborFactors& f) {
  const auto R = f.log_given.rows();
  Classification c;
  c.node = stats.node;
  c.log_unnormalized = f.log_prior;
  for (Eigen::Index h = 0; h < R; ++h) {
    for (Eigen::Index k = 0; k < R; ++k) {
      accumulate(c.log_unnormalized, stats.mutual_counts(h, k), f.log_mutual.row(h * R + k));
    }
    accumulate(c.log_unnormalized, stats.in_counts[h], f.log_received.row(h));
    accumulate(c.log_unnormalized, stats.out_counts[h], f.log_given.row(h));
  }
  c.log_normalizer = log_sum_exp(c.log_unnormalized);
  if (!std::isfinite(c.log_normalizer)) {
    throw Error(ErrorCode::DegeneratePosterior,
                "every state has zero posterior mass at node " + std::to_string(stats.node + 1));
  }
  // normalize after the max shift; with counts in the 1e5 range the log
  // values are large and log Z alone would leave a visible sum error
  c.soft = (c.log_unnormalized.array() - c.log_unnormalized.maxCoeff()).exp().matrix();
  c.soft /= c.soft.sum();
  c.map_label = map_classify(c.soft);
  return c;
}

Classification soft_classify(const NodeStats& stats, const ModelFamily& family,
                             const Params& params) {
  return soft_classify(stats, NeighborFactors::compute(family, params));
}

int map_classify(const Eigen::VectorXd& soft) {
  Eigen::Index best = 0;
  for (Eigen::Index l = 1; l < soft.size(); ++l) {
    if (soft[l] > soft[best]) best = l;
  }
  return static_cast<int>(best);
}

std::vector<Classification> classify_all(const ScoreGraph& graph, const Realization& realization,
                                         const ModelFamily& family, const Params& params) {
  const NeighborFactors f = NeighborFactors::compute(family, params);
  std::vector<Classification> out;
  out.reserve(graph.num_nodes());
  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    out.push_back(soft_classify(compute_node_stats(graph, realization, family.num_scores(), i), f));
  }
  return out;
}

}  // namespace scoregraph
