#include "scoregraph/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <thread>

#include "scoregraph/errors.hpp"
#include "scoregraph/estimator.hpp"
#include "scoregraph/network.hpp"
#include "scoregraph/rng.hpp"

namespace scoregraph {

namespace {

double misclassified_fraction(const std::vector<Classification>& c, const std::vector<int>& truth) {
  if (truth.empty()) return 0.0;
  int wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += c[i].map_label != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

// 17 significant digits round-trip, so persisted tables can be re-aggregated exactly
std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename T>
T read_key(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("\"") + key + "\": " + e.what());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::paper_scale() {
  ExperimentConfig c;
  c.N = 300;
  c.trials = 1000;
  return c;
}

std::vector<std::int64_t> ExperimentConfig::grid() const {
  return edge_grid.empty() ? default_edge_grid(N) : edge_grid;
}

FamilySpec ExperimentConfig::family_spec() const {
  FamilySpec f;
  f.C = C;
  f.R = R;
  f.theta = true_theta;
  f.gamma = true_gamma;
  f.distance = distance;
  return f;
}

void ExperimentConfig::validate() const {
  AlphabetSpec::numeric(C, R).validate();
  if (N < 2) throw Error(ErrorCode::InvalidConfig, "N must be >= 2");
  if (trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
  if (method != "nr" && method != "exact" && method != "distributed") {
    throw Error(ErrorCode::InvalidConfig, "method must be nr, exact or distributed");
  }
  const auto max_edges = static_cast<std::int64_t>(N) * (N - 1);
  for (auto n : grid()) {
    if (n < N || n > max_edges) {
      throw Error(ErrorCode::EdgeBudgetOutOfRange,
                  "edge count " + std::to_string(n) + " outside [N, N^2 - N]");
    }
  }
  family_spec().build().check_feasible(Params::scalar(true_theta, true_gamma));
}

std::vector<std::int64_t> default_edge_grid(int num_nodes, int points) {
  const double lo = num_nodes;
  const double hi = static_cast<double>(num_nodes) * (num_nodes - 1);
  std::vector<std::int64_t> grid;
  for (int k = 0; k < points; ++k) {
    const double x = points == 1 ? hi : lo + (hi - lo) * k / (points - 1);
    const auto n = static_cast<std::int64_t>(std::llround(x));
    if (grid.empty() || grid.back() != n) grid.push_back(n);
  }
  return grid;
}

ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig c) {
  reject_unknown_keys(j, {"N", "C", "R", "true_theta", "true_gamma", "edge_grid", "trials",
                          "method", "oracle", "distance"},
                      "experiment config");
  c.N = read_key(j, "N", c.N);
  c.C = read_key(j, "C", c.C);
  c.R = read_key(j, "R", c.R);
  c.true_theta = read_key(j, "true_theta", c.true_theta);
  c.true_gamma = read_key(j, "true_gamma", c.true_gamma);
  c.edge_grid = read_key(j, "edge_grid", c.edge_grid);
  c.trials = read_key(j, "trials", c.trials);
  c.method = read_key(j, "method", c.method);
  c.oracle = read_key(j, "oracle", c.oracle);
  c.distance = read_key(j, "distance", c.distance);
  return c;
}

Json to_json(const ExperimentConfig& c) {
  return {{"N", c.N},
          {"C", c.C},
          {"R", c.R},
          {"true_theta", c.true_theta},
          {"true_gamma", c.true_gamma},
          {"edge_grid", c.grid()},
          {"trials", c.trials},
          {"method", c.method},
          {"oracle", c.oracle},
          {"distance", c.distance}};
}

TrialResult run_trial(const ExperimentConfig& config, std::int64_t n, int trial) {
  const auto start = std::chrono::steady_clock::now();
  const ModelFamily family = config.family_spec().build();
  const Params truth = Params::scalar(config.true_theta, config.true_gamma);

  const std::uint64_t key = stream_key({static_cast<std::uint64_t>(StreamTag::Trial), config.seed,
                                        static_cast<std::uint64_t>(n),
                                        static_cast<std::uint64_t>(trial)});
  const ScoreGraph graph = random_score_graph(config.N, n, mix64(key ^ 1));
  const Realization real = sample_realization(graph, family, truth, mix64(key ^ 2));

  std::vector<Classification> labels;
  Params estimate;
  if (config.method == "distributed") {
    const auto schedule = make_schedule(ScheduleKind::Static, config.N, 1, mix64(key ^ 3));
    DistributedOptions options;
    options.trace_every = 0;
    const auto result = run_distributed_nr(graph, real, family, schedule, options);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(family.search.size());
    for (const auto& r : result.reports) mean += family.search.flatten(r.estimate);
    estimate = family.search.unflatten(mean / static_cast<double>(result.reports.size()));
    labels = classify_after_consensus(graph, real, family, result.reports);
  } else {
    EstimateOptions options;
    options.keep_trace = false;
    estimate = config.method == "exact" ? estimate_exact(graph, real, family, options).estimate
                                        : estimate_nr(graph, real, family, options).estimate;
    labels = classify_all(graph, real, family, estimate);
  }

  TrialResult r;
  r.n = n;
  r.trial = trial;
  r.theta_err = estimate.theta[0] - config.true_theta;
  r.gamma_err = estimate.gamma[0] - config.true_gamma;
  r.misclass_rate = misclassified_fraction(labels, real.states);
  r.oracle_misclass_rate =
      config.oracle ? misclassified_fraction(classify_all(graph, real, family, truth), real.states)
                    : std::numeric_limits<double>::quiet_NaN();
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

int worker_count(int requested) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("SCOREGRAPH_THREADS")) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, n);
}

SweepRow aggregate(std::int64_t n, const std::vector<TrialResult>& trials) {
  SweepRow row;
  row.n = n;
  const double T = static_cast<double>(trials.size());
  double st = 0.0, sg = 0.0, m = 0.0, o = 0.0;
  for (const auto& t : trials) {
    st += t.theta_err * t.theta_err;
    sg += t.gamma_err * t.gamma_err;
    m += t.misclass_rate;
    o += t.oracle_misclass_rate;
  }
  row.rmse_theta = std::sqrt(st / T);
  row.rmse_gamma = std::sqrt(sg / T);
  row.misclass = m / T;
  row.oracle_misclass = o / T;
  if (trials.size() > 1) {
    double ss = 0.0;
    for (const auto& t : trials) ss += (t.misclass_rate - row.misclass) * (t.misclass_rate - row.misclass);
    row.se_misclass = std::sqrt(ss / (T - 1.0) / T);
  }
  return row;
}

SweepResult run_sweep(const ExperimentConfig& config, int threads) {
  config.validate();
  auto grid = config.grid();
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  struct Task {
    std::int64_t n;
    int trial;
  };
  std::vector<Task> tasks;
  for (auto n : grid) {
    for (int t = 0; t < config.trials; ++t) tasks.push_back({n, t});
  }
  std::vector<TrialResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  const auto work = [&] {
    for (std::size_t k = next++; k < tasks.size() && !failed; k = next++) {
      try {
        results[k] = run_trial(config, tasks[k].n, tasks[k].trial);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const int workers = std::min<int>(worker_count(threads), static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  SweepResult out;
  out.trials = std::move(results);
  std::size_t k = 0;
  for (auto n : grid) {
    const std::vector<TrialResult> block(out.trials.begin() + k, out.trials.begin() + k + config.trials);
    out.rows.push_back(aggregate(n, block));
    k += config.trials;
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = "n,rmse_theta,rmse_gamma,misclass,oracle_misclass,se_misclass\n";
  for (const auto& r : rows) {
    s += std::to_string(r.n) + "," + format_double(r.rmse_theta) + "," + format_double(r.rmse_gamma) +
         "," + format_double(r.misclass) + "," + format_double(r.oracle_misclass) + "," +
         format_double(r.se_misclass) + "\n";
  }
  return s;
}

std::string trials_csv(const std::vector<TrialResult>& trials) {
  std::string s = "n,trial,theta_err,gamma_err,misclass,oracle_misclass\n";
  for (const auto& t : trials) {
    s += std::to_string(t.n) + "," + std::to_string(t.trial) + "," + format_double(t.theta_err) + "," +
         format_double(t.gamma_err) + "," + format_double(t.misclass_rate) + "," +
         format_double(t.oracle_misclass_rate) + "\n";
  }
  return s;
}

CaseStudyConfig case_study_config_from_json(const Json& j, CaseStudyConfig c) {
  reject_unknown_keys(j, {"N", "C", "R", "n", "true_theta", "true_gamma", "use_true_params"},
                      "case-study config");
  c.N = read_key(j, "N", c.N);
  c.C = read_key(j, "C", c.C);
  c.R = read_key(j, "R", c.R);
  c.n = read_key(j, "n", c.n);
  c.true_theta = read_key(j, "true_theta", c.true_theta);
  c.true_gamma = read_key(j, "true_gamma", c.true_gamma);
  c.use_true_params = read_key(j, "use_true_params", c.use_true_params);
  return c;
}

CaseStudy case_study(const CaseStudyConfig& config) {
  FamilySpec spec;
  spec.C = config.C;
  spec.R = config.R;
  const ModelFamily family = spec.build();
  const Params truth = Params::scalar(config.true_theta, config.true_gamma);
  family.check_feasible(truth);

  const std::uint64_t key = stream_key({static_cast<std::uint64_t>(StreamTag::Trial), config.seed,
                                        static_cast<std::uint64_t>(config.n), 0});
  CaseStudy out;
  out.alphabet = family.alphabet;
  out.graph = random_score_graph(config.N, config.n, mix64(key ^ 1));
  out.realization = sample_realization(out.graph, family, truth, mix64(key ^ 2));
  if (config.use_true_params) {
    out.params = truth;
  } else {
    EstimateOptions options;
    options.keep_trace = false;
    out.params = estimate_nr(out.graph, out.realization, family, options).estimate;
  }
  out.nodes = classify_all(out.graph, out.realization, family, out.params);
  return out;
}

Json case_study_json(const CaseStudy& study) {
  Json j = instance_to_json(study.graph, study.realization, study.alphabet, true);
  j["theta"] = study.params.theta[0];
  j["gamma"] = study.params.gamma[0];
  Json nodes = Json::array();
  for (const auto& c : study.nodes) {
    const int truth = study.realization.states[c.node];
    nodes.push_back({{"node", c.node + 1},
                     {"soft", std::vector<double>(c.soft.begin(), c.soft.end())},
                     {"map", c.map_label + 1},
                     {"true", truth + 1},
                     {"correct", c.map_label == truth}});
  }
  j["nodes"] = std::move(nodes);
  return j;
}

}  // namespace scoregraph
