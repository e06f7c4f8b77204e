#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "scoregraph/errors.hpp"
#include "scoregraph/harness.hpp"

using namespace scoregraph;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.N = 8;
  c.C = 3;
  c.trials = 6;
  c.seed = 11;
  c.edge_grid = {8, 30, 56};
  return c;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("default grid spans cycle to complete graph") {
  auto g = default_edge_grid(50);
  REQUIRE(g.size() == 8);
  CHECK(g.front() == 50);
  CHECK(g.back() == 2450);
  CHECK(std::is_sorted(g.begin(), g.end()));
  auto p = ExperimentConfig::paper_scale();
  CHECK(p.N == 300);
  CHECK(p.trials == 1000);
  CHECK(p.grid().back() == 89700);
}

TEST_CASE("config validation") {
  auto c = small_config();
  CHECK_NOTHROW(c.validate());
  c.edge_grid = {100};
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.C = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_config();
  c.method = "magic";
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"Nodes": 3})")), Error);
  auto j = experiment_config_from_json(Json::parse(R"({"N": 9, "trials": 2, "edge_grid": [9, 20]})"));
  CHECK(j.N == 9);
  CHECK(j.grid().size() == 2);
  CHECK(experiment_config_from_json(to_json(j)).trials == 2);
}

TEST_CASE("sweep output is deterministic across thread counts") {
  auto c = small_config();
  auto a = run_sweep(c, 1), b = run_sweep(c, 3);
  CHECK(sweep_csv(a.rows) == sweep_csv(b.rows));
  CHECK(trials_csv(a.trials) == trials_csv(b.trials));
  CHECK(sweep_csv(a.rows).rfind("n,rmse_theta,rmse_gamma,misclass,oracle_misclass,se_misclass\n", 0) == 0);
}

TEST_CASE("a grid point does not depend on its neighbors") {
  auto c = small_config();
  auto all = run_sweep(c, 1);
  c.edge_grid = {30};
  auto one = run_sweep(c, 1);
  REQUIRE(one.rows.size() == 1);
  CHECK(sweep_csv(one.rows).substr(sweep_csv(one.rows).find('\n')) ==
        sweep_csv({all.rows[1]}).substr(sweep_csv({all.rows[1]}).find('\n')));
}

TEST_CASE("persisted trials re-aggregate exactly") {
  auto c = small_config();
  auto res = run_sweep(c, 2);
  auto rows = parse_csv(trials_csv(res.trials));
  REQUIRE(rows.size() == 1 + res.trials.size());
  for (const auto& agg : res.rows) {
    double st = 0, sg = 0, m = 0;
    int T = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
      if (std::stoll(rows[k][0]) != agg.n) continue;
      const double te = std::stod(rows[k][2]), ge = std::stod(rows[k][3]);
      st += te * te;
      sg += ge * ge;
      m += std::stod(rows[k][4]);
      ++T;
    }
    CHECK(T == c.trials);
    CHECK(std::abs(std::sqrt(st / T) - agg.rmse_theta) <= 1e-12);
    CHECK(std::abs(std::sqrt(sg / T) - agg.rmse_gamma) <= 1e-12);
    CHECK(std::abs(m / T - agg.misclass) <= 1e-12);
  }
}

TEST_CASE("single trial rmse is the absolute error") {
  auto c = small_config();
  c.trials = 1;
  auto res = run_sweep(c, 1);
  for (std::size_t k = 0; k < res.rows.size(); ++k) {
    CHECK(res.rows[k].rmse_theta == doctest::Approx(std::abs(res.trials[k].theta_err)).epsilon(1e-15));
    CHECK(res.rows[k].rmse_gamma == doctest::Approx(std::abs(res.trials[k].gamma_err)).epsilon(1e-15));
  }
}

TEST_CASE("one community never misclassifies") {
  auto c = small_config();
  c.C = 1;
  for (const auto& row : run_sweep(c, 1).rows) {
    CHECK(row.misclass == 0.0);
    CHECK(row.oracle_misclass == 0.0);
  }
}

TEST_CASE("rates are fractions and the oracle can be switched off") {
  auto c = small_config();
  c.oracle = false;
  auto t = run_trial(c, 30, 0);
  CHECK(t.misclass_rate >= 0.0);
  CHECK(t.misclass_rate <= 1.0);
  CHECK(std::isnan(t.oracle_misclass_rate));
  auto again = run_trial(c, 30, 0);
  CHECK(again.theta_err == t.theta_err);
}

TEST_CASE("other estimators run through the harness") {
  auto c = small_config();
  c.N = 5;
  c.edge_grid = {12};
  c.trials = 2;
  c.method = "exact";
  CHECK_NOTHROW(run_sweep(c, 1));
  c.method = "distributed";
  CHECK_NOTHROW(run_sweep(c, 1));
}

TEST_CASE("worker count") {
  CHECK(worker_count(3) == 3);
  setenv("SCOREGRAPH_THREADS", "2", 1);
  CHECK(worker_count(0) == 2);
  unsetenv("SCOREGRAPH_THREADS");
  CHECK(worker_count(0) >= 1);
}

TEST_CASE("case study rows") {
  CaseStudyConfig cfg;
  cfg.seed = 4;
  auto study = case_study(cfg);
  auto j = case_study_json(study);
  REQUIRE(j["nodes"].size() == 10);
  for (const auto& row : j["nodes"]) {
    REQUIRE(row["soft"].size() == 3);
    double s = 0;
    for (double v : row["soft"]) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(row["correct"].get<bool>() == (row["map"] == row["true"]));
  }
  CHECK(j["edges"].size() == 30);
  CHECK(case_study_json(case_study(cfg)).dump() == j.dump());
}
