#include "scoregraph/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "scoregraph/classifier.hpp"
#include "scoregraph/errors.hpp"
#include "scoregraph/estimator.hpp"
#include "scoregraph/harness.hpp"
#include "scoregraph/io.hpp"
#include "scoregraph/network.hpp"

namespace scoregraph {

namespace {

const std::vector<std::string> kFamilyKeys = {"family", "C", "R", "theta", "gamma", "distance"};

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  int verbosity = 0;
};

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::BudgetExceeded:
    case ErrorCode::NoConvergence:
    case ErrorCode::DegeneratePosterior:
      return 1;
    default:
      return 2;
  }
}

std::uint64_t require_seed(const Common& c) {
  if (!c.seed) throw Error(ErrorCode::InvalidConfig, "missing required flag --seed");
  return *c.seed;
}

Json load_config(const Common& c) {
  Json j = c.config_path.empty() ? Json::object() : read_json_file(c.config_path);
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  for (const auto& o : c.overrides) apply_override(j, o);
  return j;
}

std::string dump(const Json& j) { return j.dump(); }

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void emit(const Common& c, std::ostream& out, const std::string& text) {
  if (c.out_path.empty()) {
    out << text;
  } else {
    write_text_file(c.out_path, text);
  }
}

// Family from the config, with C and R taken from the instance. A config that
// names a different alphabet is rejected.
ModelFamily family_for_instance(const Json& cfg, const Instance& inst, FamilySpec& spec) {
  spec = family_spec_from_json(cfg);
  if ((cfg.contains("C") && spec.C != inst.alphabet.num_states) ||
      (cfg.contains("R") && spec.R != inst.alphabet.num_scores)) {
    throw Error(ErrorCode::InvalidConfig, "config alphabet does not match the instance");
  }
  spec.C = inst.alphabet.num_states;
  spec.R = inst.alphabet.num_scores;
  return spec.build();
}

Json soft_row(const Classification& c, const Realization& r, bool has_states) {
  Json row = {{"node", c.node + 1},
              {"soft", std::vector<double>(c.soft.begin(), c.soft.end())},
              {"map", c.map_label + 1}};
  if (has_states) row["true"] = r.states[c.node] + 1;
  return row;
}

void parse_grid(const std::string& text, int& w, int& h) {
  int a = 0, b = 0;
  char x = 0;
  std::istringstream in(text);
  if (!(in >> a >> x >> b) || (x != 'x' && x != 'X') || a < 1 || b < 1 || !in.eof()) {
    throw Error(ErrorCode::InvalidConfig, "--grid expects WxH with positive integers");
  }
  w = a;
  h = b;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Score-graph state classification and parameter estimation"};
  app.name("scoregraph");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Common common;
  bool json_errors = false;
  std::string seed_text;
  app.add_flag("--json-errors", json_errors, "Report errors on stderr as one JSON object");

  const auto add_common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--config", common.config_path, "JSON config file");
    sub->add_option("--set", common.overrides, "Override a config key, KEY=VALUE (dotted keys)")
        ->take_all();
    sub->add_option("--out", common.out_path, "Output file (default: stdout)");
    if (with_seed) sub->add_option("--seed", seed_text, "Random seed (unsigned 64-bit)");
    sub->add_flag("-v,--verbose", common.verbosity, "Progress and timing on stderr");
    sub->add_flag("--json-errors", json_errors, "Report errors on stderr as one JSON object");
  };

  auto* gen = app.add_subcommand("generate", "Sample a score graph with hidden states and scores");
  add_common(gen, true);

  std::string instance_path;
  auto* cls = app.add_subcommand("classify", "Soft-classify every node of an instance");
  add_common(cls, false);
  cls->add_option("--instance", instance_path, "Instance JSON file")->required();

  std::string method = "nr";
  std::string grid_text = "8x8";
  double tol = 1e-6;
  int max_iters = 500;
  std::string trace_path;
  auto* est = app.add_subcommand("estimate", "Estimate theta and gamma from an instance");
  add_common(est, false);
  est->add_option("--instance", instance_path, "Instance JSON file")->required();
  est->add_option("--method", method, "exact | nr")->check(CLI::IsMember({"exact", "nr"}));
  est->add_option("--grid", grid_text, "Restart grid, theta cells x gamma cells");
  est->add_option("--tol", tol, "Stationarity tolerance");
  est->add_option("--max-iters", max_iters, "Iterations per restart");
  est->add_option("--trace", trace_path, "Write the objective trace as CSV");

  std::string schedule_name = "static";
  int window = 0;
  int steps = 50'000;
  double consensus_tol = 1e-6;
  bool use_mean = false;
  auto* dist = app.add_subcommand("distributed", "Run the distributed estimator on a simulated network");
  add_common(dist, true);
  dist->add_option("--instance", instance_path, "Instance JSON file")->required();
  dist->add_option("--schedule", schedule_name, "static | gossip | random | complete")
      ->check(CLI::IsMember({"static", "gossip", "periodic_gossip", "random", "complete"}));
  dist->add_option("--Q", window, "Connectivity window (default: 1, or N for gossip and random)");
  dist->add_option("--steps", steps, "Maximum rounds per restart");
  dist->add_option("--consensus-tol", consensus_tol, "Disagreement tolerance");
  dist->add_option("--trace", trace_path, "Write the residual trace as CSV");
  dist->add_flag("--use-mean", use_mean, "Classify with the mean of the agents' estimates");

  bool paper_scale = false;
  int threads = 0;
  std::string trials_path;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over edge counts");
  add_common(sweep, true);
  sweep->add_flag("--paper-scale", paper_scale, "N = 300 and 1000 trials per point (hours)");
  sweep->add_option("--threads", threads, "Worker threads (default: SCOREGRAPH_THREADS or all cores)");
  sweep->add_option("--trials-out", trials_path, "Write per-trial errors as CSV");

  auto* cs = app.add_subcommand("case-study", "Annotated small instance with soft classifications");
  add_common(cs, true);

  const auto report = [&](const std::string& code, const std::string& message, int exit) {
    if (json_errors) {
      err << Json{{"error", {{"code", code}, {"message", message}, {"exit", exit}}}}.dump() << "\n";
    } else {
      err << "error: " << message << "\n";
    }
    return exit;
  };

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      return report("Usage", e.what(), 2);
    }
    if (!seed_text.empty()) {
      std::size_t used = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(seed_text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != seed_text.size() || seed_text[0] == '-') {
        throw Error(ErrorCode::InvalidConfig, "--seed must be an unsigned integer");
      }
      common.seed = v;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto log = [&](const std::string& msg) {
      if (common.verbosity > 0) {
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        err << "[" << fmt(s) << "s] " << msg << "\n";
      }
    };

    if (gen->parsed()) {
      const std::uint64_t seed = require_seed(common);
      Json cfg = load_config(common);
      std::vector<std::string> allowed = kFamilyKeys;
      allowed.insert(allowed.end(), {"N", "n"});
      reject_unknown_keys(cfg, allowed, "generate config");
      const FamilySpec spec = family_spec_from_json(cfg);
      const ModelFamily family = spec.build();
      const int N = cfg.value("N", 20);
      const std::int64_t n = cfg.value("n", static_cast<std::int64_t>(3 * N));
      const ScoreGraph graph = random_score_graph(N, n, seed);
      const Realization real = sample_realization(graph, family, spec.params(), seed);
      log("sampled " + std::to_string(N) + " nodes, " + std::to_string(n) + " edges");
      emit(common, out, dump(instance_to_json(graph, real, family.alphabet)) + "\n");
      return 0;
    }

    if (cls->parsed()) {
      Json cfg = load_config(common);
      reject_unknown_keys(cfg, kFamilyKeys, "classify config");
      const Instance inst = instance_from_json(read_json_file(instance_path));
      FamilySpec spec;
      const ModelFamily family = family_for_instance(cfg, inst, spec);
      const auto labels = classify_all(inst.graph, inst.realization, family, spec.params());
      std::string text;
      for (const auto& c : labels) text += dump(soft_row(c, inst.realization, inst.has_states)) + "\n";
      emit(common, out, text);
      return 0;
    }

    if (est->parsed()) {
      Json cfg = load_config(common);
      reject_unknown_keys(cfg, kFamilyKeys, "estimate config");
      const Instance inst = instance_from_json(read_json_file(instance_path));
      FamilySpec spec;
      const ModelFamily family = family_for_instance(cfg, inst, spec);
      EstimateOptions options;
      parse_grid(grid_text, options.grid_theta, options.grid_gamma);
      options.tol = tol;
      options.max_iters = max_iters;
      options.keep_trace = !trace_path.empty();
      const EstimateReport r = method == "exact"
                                   ? estimate_exact(inst.graph, inst.realization, family, options)
                                   : estimate_nr(inst.graph, inst.realization, family, options);
      log("estimate done after " + std::to_string(r.restarts_used) + " restarts");
      if (!trace_path.empty()) {
        std::string csv = "restart,iteration,objective,theta,gamma\n";
        for (const auto& t : r.trace) {
          csv += std::to_string(t.restart) + "," + std::to_string(t.iteration) + "," + fmt(t.objective) +
                 "," + fmt(t.params.theta[0]) + "," + fmt(t.params.gamma[0]) + "\n";
        }
        write_text_file(trace_path, csv);
      }
      const Json j = {{"method", to_string(r.method)},   {"theta", r.estimate.theta[0]},
                      {"gamma", r.estimate.gamma[0]},     {"objective", r.objective},
                      {"converged", r.converged},         {"restarts", r.restarts_used},
                      {"best_restart", r.best_restart + 1}};
      // Both likelihoods at the estimate; the exact one only while enumeration is affordable
      Json full = j;
      const double nr = nr_log_likelihood(inst.graph, inst.realization, family, r.estimate);
      full["nr_log_likelihood"] = nr;
      try {
        const double exact = exact_log_likelihood(inst.graph, inst.realization, family, r.estimate);
        full["log_likelihood"] = exact;
        full["likelihood_gap"] = std::abs(exact - nr);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BudgetExceeded) throw;
        full["log_likelihood"] = nullptr;
        full["likelihood_gap"] = nullptr;
      }
      emit(common, out, dump(full) + "\n");
      return 0;
    }

    if (dist->parsed()) {
      Json cfg = load_config(common);
      reject_unknown_keys(cfg, kFamilyKeys, "distributed config");
      const Instance inst = instance_from_json(read_json_file(instance_path));
      FamilySpec spec;
      const ModelFamily family = family_for_instance(cfg, inst, spec);
      const ScheduleKind kind = parse_schedule_kind(schedule_name);
      const int N = inst.graph.num_nodes();
      if (window <= 0) {
        window = (kind == ScheduleKind::PeriodicGossip || kind == ScheduleKind::Random) ? N : 1;
      }
      std::uint64_t seed = 0;
      if (kind == ScheduleKind::Random) seed = require_seed(common);
      const CommSchedule schedule = make_schedule(kind, N, window, seed);
      DistributedOptions options;
      options.max_steps = steps;
      options.consensus_tol = consensus_tol;
      options.trace_every = trace_path.empty() ? 0 : 1;
      const auto result = run_distributed_nr(inst.graph, inst.realization, family, schedule, options);
      log("distributed run: " + std::to_string(result.steps) + " rounds, converged=" +
          (result.converged ? "true" : "false"));
      if (!trace_path.empty()) {
        std::string csv = "step,max_disagreement,mean_objective\n";
        for (const auto& row : result.trace) {
          csv += std::to_string(row.step) + "," + fmt(row.max_disagreement) + "," +
                 fmt(row.mean_objective) + "\n";
        }
        write_text_file(trace_path, csv);
      }
      const auto labels =
          classify_after_consensus(inst.graph, inst.realization, family, result.reports, use_mean);
      const auto other =
          classify_after_consensus(inst.graph, inst.realization, family, result.reports, !use_mean);
      int differ = 0;
      std::string text;
      for (int i = 0; i < N; ++i) {
        const auto& r = result.reports[i];
        Json row = soft_row(labels[i], inst.realization, inst.has_states);
        row[use_mean ? "map_local" : "map_mean"] = other[i].map_label + 1;
        if (other[i].map_label != labels[i].map_label) ++differ;
        row["theta"] = r.estimate.theta[0];
        row["gamma"] = r.estimate.gamma[0];
        row["objective"] = r.objective;
        row["converged"] = r.converged;
        text += dump(row) + "\n";
      }
      log(std::to_string(differ) + " labels differ between local and mean estimates");
      emit(common, out, text);
      return 0;
    }

    if (sweep->parsed()) {
      const std::uint64_t seed = require_seed(common);
      Json cfg = load_config(common);
      ExperimentConfig config =
          experiment_config_from_json(cfg, paper_scale ? ExperimentConfig::paper_scale() : ExperimentConfig{});
      config.seed = seed;
      config.validate();
      log("sweep with " + std::to_string(worker_count(threads)) + " workers");
      const SweepResult result = run_sweep(config, threads);
      if (!trials_path.empty()) write_text_file(trials_path, trials_csv(result.trials));
      emit(common, out, sweep_csv(result.rows));
      log("sweep done");
      return 0;
    }

    if (cs->parsed()) {
      CaseStudyConfig config = case_study_config_from_json(load_config(common));
      config.seed = require_seed(common);
      emit(common, out, case_study_json(case_study(config)).dump(2) + "\n");
      return 0;
    }
  } catch (const Error& e) {
    return report(to_string(e.code()), e.what(), exit_code(e.code()));
  } catch (const Json::exception& e) {
    return report("InvalidConfig", e.what(), 2);
  } catch (const std::exception& e) {
    return report("Runtime", e.what(), 1);
  }
  return 2;
}

}  // namespace scoregraph
