#pragma once

#include <vector>

#include <Eigen/Core>

#include "scoregraph/graph.hpp"
#include "scoregraph/model.hpp"

namespace scoregraph {

struct Classification {
  NodeId node = 0;
  Eigen::VectorXd soft;              // posterior over states
  int map_label = 0;
  Eigen::VectorXd log_unnormalized;  // log v_i(c_l)
  double log_normalizer = 0.0;       // log Z_i
};

/// Per-state neighbor factors for one (theta, gamma). With P the score
/// tensor and p the prior,
///   mutual(h,k)[l] = sum_m p_{k|m,l} p_{h|l,m} p_m
///   received(h)[l] = sum_m p_{h|m,l} p_m
///   given(h)[l]    = sum_m p_{h|l,m} p_m
/// stored as logs.
struct NeighborFactors {
  Eigen::VectorXd log_prior;    // C
  Eigen::MatrixXd log_mutual;   // (h*R + k) x C
  Eigen::MatrixXd log_received; // R x C
  Eigen::MatrixXd log_given;    // R x C

  static NeighborFactors compute(const ModelFamily& family, const Params& params);
};

/// Posterior of a node's state from its incident scores.
/// Throws Error{InfeasibleParams, DegeneratePosterior}.
Classification soft_classify(const NodeStats& stats, const ModelFamily& family,
                             const Params& params);
Classification soft_classify(const NodeStats& stats, const NeighborFactors& factors);

/// argmax with ties going to the smallest index.
int map_classify(const Eigen::VectorXd& soft);
inline int map_classify(const Classification& c) { return map_classify(c.soft); }

std::vector<Classification> classify_all(const ScoreGraph& graph, const Realization& realization,
                                         const ModelFamily& family, const Params& params);

/// log(sum(exp(x))) with a max shift; -inf when every entry is -inf.
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x);

/// log(exp(log_a) * exp(log_x)), each row reduced by log_sum_exp.
Eigen::VectorXd log_mat_vec(const Eigen::Ref<const Eigen::MatrixXd>& log_a,
                            const Eigen::Ref<const Eigen::VectorXd>& log_x);

}  // namespace scoregraph
