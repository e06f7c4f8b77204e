#include "scoregraph/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scoregraph/classifier.hpp"
#include "scoregraph/errors.hpp"
#include "scoregraph/optimize.hpp"

namespace scoregraph {

std::string to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::Exact: return "exact";
    case EstimateMethod::NrCentralized: return "nr_centralized";
    case EstimateMethod::NrDistributed: return "nr_distributed";
  }
  return "unknown";
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kGradientCap = 1e100;

// log received(h, l) = log sum_m p_{h|m,l} p_m
Eigen::MatrixXd log_received_factor(const ScoreTensorXd& log_P, const Eigen::VectorXd& log_p) {
  Eigen::MatrixXd log_q(log_P.num_scores(), log_P.num_states());
  for (int h = 0; h < log_P.num_scores(); ++h) {
    log_q.row(h) = log_mat_vec(log_P.slice(h).transpose(), log_p).transpose();
  }
  return log_q;
}

double relaxed_term(const Eigen::VectorXi& n, const Eigen::VectorXd& log_p,
                    const Eigen::MatrixXd& log_q, Eigen::VectorXd& t) {
  t = log_p;
  for (Eigen::Index h = 0; h < n.size(); ++h) {
    if (n[h] != 0) t += static_cast<double>(n[h]) * log_q.row(h).transpose();
  }
  return log_sum_exp(t);
}

std::vector<int> grid_shape(const ModelFamily& family, int grid_theta, int grid_gamma) {
  std::vector<int> shape(family.search.theta.size(), grid_theta);
  shape.insert(shape.end(), family.search.gamma.size(), grid_gamma);
  return shape;
}

EstimateReport multistart(const BoxObjective& objective, double scale, const ModelFamily& family,
                          const EstimateOptions& options, EstimateMethod method) {
  const ParamBox& box = family.search;
  const Eigen::VectorXd lo = box.lower();
  const Eigen::VectorXd hi = box.upper();
  AscentOptions ascent{options.tol, options.max_iters};

  EstimateReport report;
  report.method = method;
  double best = kNegInf;
  bool first = true;
  const auto starts = grid_cell_centers(
      lo, hi, grid_shape(family, options.grid_theta, options.grid_gamma), box.log_axes());
  for (int k = 0; k < static_cast<int>(starts.size()); ++k) {
    const AscentResult r = projected_gradient_ascent(objective, lo, hi, starts[k], ascent);
    if (options.keep_trace) {
      for (const auto& s : r.trace) {
        report.trace.push_back({k, s.iteration, s.value * scale, box.unflatten(s.z)});
      }
    }
    // strict comparison keeps the lowest restart index on ties
    if (first || r.value > best) {
      first = false;
      best = r.value;
      report.estimate = box.unflatten(r.z);
      report.converged = r.converged;
      report.best_restart = k;
    }
  }
  report.objective = best * scale;
  report.restarts_used = static_cast<int>(starts.size());
  return report;
}

}  // namespace

double exact_log_likelihood(const ScoreGraph& graph, const Realization& realization,
                            const ModelFamily& family, const Params& params,
                            std::uint64_t term_budget) {
  family.check_feasible(params);
  const int N = graph.num_nodes();
  const int C = family.num_states();
  std::uint64_t terms = 1;
  for (int i = 0; i < N; ++i) {
    if (terms > term_budget / static_cast<std::uint64_t>(C)) {
      throw Error(ErrorCode::BudgetExceeded, std::to_string(C) + "^" + std::to_string(N) +
                                                 " joint states exceed the budget of " +
                                                 std::to_string(term_budget));
    }
    terms *= static_cast<std::uint64_t>(C);
  }

  const ScoreTensorXd log_P = log_score_tensor(family, params.theta);
  const Eigen::VectorXd log_p = log_prior_vector(family, params.gamma);
  const auto& edges = graph.edges();

  std::vector<int> x(N, 0);
  double run_max = kNegInf;
  double run_sum = 0.0;
  for (std::uint64_t t = 0; t < terms; ++t) {
    double v = 0.0;
    for (int i = 0; i < N; ++i) v += log_p[x[i]];
    for (std::size_t e = 0; e < edges.size() && v > kNegInf; ++e) {
      v += log_P(realization.scores[e], x[edges[e].from], x[edges[e].to]);
    }
    if (v > run_max) {
      run_sum = run_sum * std::exp(run_max - v) + 1.0;
      run_max = v;
    } else if (v > kNegInf) {
      run_sum += std::exp(v - run_max);
    }
    for (int i = N - 1; i >= 0 && ++x[i] == C; --i) x[i] = 0;
  }
  return run_max + std::log(run_sum);
}

double node_relaxed_term(const Eigen::VectorXi& received_counts, const ModelFamily& family,
                         const Params& params) {
  family.check_feasible(params);
  const Eigen::VectorXd log_p = log_prior_vector(family, params.gamma);
  const Eigen::MatrixXd log_q = log_received_factor(log_score_tensor(family, params.theta), log_p);
  Eigen::VectorXd t;
  return relaxed_term(received_counts, log_p, log_q, t);
}

RelaxedObjective::RelaxedObjective(const std::vector<Eigen::VectorXi>& received_counts)
    : num_nodes_(static_cast<int>(received_counts.size())) {
  std::map<std::vector<int>, int> histogram;
  for (const auto& n : received_counts) ++histogram[std::vector<int>(n.begin(), n.end())];
  for (const auto& [key, mult] : histogram) {
    groups_.emplace_back(Eigen::Map<const Eigen::VectorXi>(key.data(), static_cast<Eigen::Index>(key.size())),
                         mult);
  }
}

RelaxedObjective RelaxedObjective::from_realization(const ScoreGraph& graph,
                                                    const Realization& realization,
                                                    int num_scores) {
  std::vector<Eigen::VectorXi> counts(graph.num_nodes(), Eigen::VectorXi::Zero(num_scores));
  for (int k = 0; k < graph.num_edges(); ++k) ++counts[graph.edges()[k].to][realization.scores[k]];
  return RelaxedObjective(counts);
}

double RelaxedObjective::value(const ModelFamily& family, const Params& params) const {
  family.check_feasible(params);
  const Eigen::VectorXd log_p = log_prior_vector(family, params.gamma);
  const Eigen::MatrixXd log_q = log_received_factor(log_score_tensor(family, params.theta), log_p);
  Eigen::VectorXd t;
  double total = 0.0;
  for (const auto& [n, mult] : groups_) total += mult * relaxed_term(n, log_p, log_q, t);
  return total;
}

std::pair<double, Eigen::VectorXd> RelaxedObjective::value_and_gradient(const ModelFamily& family,
                                                                        const Params& params) const {
  family.check_feasible(params);
  const ScoreTensorXd log_P = log_score_tensor(family, params.theta);
  const Eigen::VectorXd log_p = log_prior_vector(family, params.gamma);
  const Eigen::MatrixXd log_q = log_received_factor(log_P, log_p);
  const auto R = log_q.rows();
  const auto C = log_q.cols();

  // weight(h, l): coefficient of d log q(h, l) in the objective
  // p_bar(l): derivative through the explicit prior factor p_l
  Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(R, C);
  Eigen::VectorXd p_bar = Eigen::VectorXd::Zero(C);
  Eigen::VectorXd t;
  double total = 0.0;
  for (const auto& [n, mult] : groups_) {
    const double g = relaxed_term(n, log_p, log_q, t);
    total += mult * g;
    for (Eigen::Index l = 0; l < C; ++l) {
      double log_a = 0.0;
      for (Eigen::Index h = 0; h < R; ++h) {
        if (n[h] != 0) log_a += n[h] * log_q(h, l);
      }
      p_bar[l] += mult * std::exp(log_a - g);
      const double w = std::exp(t[l] - g);
      if (w == 0.0) continue;
      for (Eigen::Index h = 0; h < R; ++h) weight(h, l) += mult * w * n[h];
    }
  }

  // d log q(h,l) = sum_m resp(h,m,l) d log P[h](m,l) + sum_m P[h](m,l)/q(h,l) dp_m,
  // resp(h,m,l) = P[h](m,l) p_m / q(h,l)
  const auto jac_theta = log_score_tensor_jacobian(family, params.theta);
  Eigen::VectorXd grad_theta = Eigen::VectorXd::Zero(params.theta.size());
  for (Eigen::Index h = 0; h < R; ++h) {
    const auto& slice = log_P.slice(static_cast<int>(h));
    for (Eigen::Index l = 0; l < C; ++l) {
      if (weight(h, l) == 0.0) continue;
      for (Eigen::Index m = 0; m < C; ++m) {
        const double ratio = std::exp(slice(m, l) - log_q(h, l));  // P / q
        if (ratio == 0.0) continue;
        p_bar[m] += weight(h, l) * ratio;
        const double resp = weight(h, l) * std::exp(slice(m, l) + log_p[m] - log_q(h, l));
        if (resp == 0.0) continue;
        for (std::size_t k = 0; k < jac_theta.size(); ++k) {
          grad_theta[static_cast<Eigen::Index>(k)] += resp * jac_theta[k](static_cast<int>(h), m, l);
        }
      }
    }
  }

  // At a face of the simplex (e.g. gamma = 0) the derivative through a
  // vanishing prior weight can overflow; cap it so the ascent direction stays usable.
  const Eigen::MatrixXd jac_gamma = prior_jacobian(family, params.gamma);
  Eigen::VectorXd grad_gamma = Eigen::VectorXd::Zero(params.gamma.size());
  for (Eigen::Index k = 0; k < jac_gamma.cols(); ++k) {
    for (Eigen::Index l = 0; l < C; ++l) {
      if (jac_gamma(l, k) == 0.0) continue;
      grad_gamma[k] += std::clamp(jac_gamma(l, k) * p_bar[l], -kGradientCap, kGradientCap);
    }
  }

  Eigen::VectorXd grad(params.theta.size() + params.gamma.size());
  grad << grad_theta, grad_gamma.cwiseMax(-kGradientCap).cwiseMin(kGradientCap);
  return {total, grad};
}

double nr_log_likelihood(const ScoreGraph& graph, const Realization& realization,
                         const ModelFamily& family, const Params& params) {
  return RelaxedObjective::from_realization(graph, realization, family.num_scores())
      .value(family, params);
}

EstimateReport estimate_exact(const ScoreGraph& graph, const Realization& realization,
                              const ModelFamily& family, const EstimateOptions& options) {
  const ParamBox& box = family.search;
  // probe the budget once so oversize instances fail before any search
  exact_log_likelihood(graph, realization, family, box.unflatten(box.lower()));
  const double scale = graph.num_nodes();
  const auto mean_value = [&](const Eigen::VectorXd& z) {
    return exact_log_likelihood(graph, realization, family, box.unflatten(z)) / scale;
  };
  BoxObjective objective;
  objective.value = mean_value;
  objective.value_and_gradient = [&](const Eigen::VectorXd& z) {
    return std::make_pair(mean_value(z),
                          finite_difference_gradient(mean_value, z, box.lower(), box.upper()));
  };
  return multistart(objective, scale, family, options, EstimateMethod::Exact);
}

EstimateReport estimate_nr(const RelaxedObjective& relaxed, const ModelFamily& family,
                           const EstimateOptions& options) {
  const ParamBox& box = family.search;
  const double scale = std::max(1, relaxed.num_nodes());
  BoxObjective objective;
  objective.value = [&](const Eigen::VectorXd& z) {
    return relaxed.value(family, box.unflatten(z)) / scale;
  };
  objective.value_and_gradient = [&](const Eigen::VectorXd& z) {
    auto [v, g] = relaxed.value_and_gradient(family, box.unflatten(z));
    return std::make_pair(v / scale, Eigen::VectorXd(g / scale));
  };
  return multistart(objective, scale, family, options, EstimateMethod::NrCentralized);
}

EstimateReport estimate_nr(const ScoreGraph& graph, const Realization& realization,
                           const ModelFamily& family, const EstimateOptions& options) {
  return estimate_nr(RelaxedObjective::from_realization(graph, realization, family.num_scores()),
                     family, options);
}

Params grid_best(const std::function<double(const Params&)>& objective, const ModelFamily& family,
                 int grid_theta, int grid_gamma) {
  const ParamBox& box = family.search;
  double best = kNegInf;
  Params arg;
  bool first = true;
  for (const auto& z : grid_cell_centers(box.lower(), box.upper(),
                                         grid_shape(family, grid_theta, grid_gamma),
                                         box.log_axes())) {
    const double v = objective(box.unflatten(z));
    if (first || v > best) {
      first = false;
      best = v;
      arg = box.unflatten(z);
    }
  }
  return arg;
}

}  // namespace scoregraph
