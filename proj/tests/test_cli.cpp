#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scoregraph/cli.hpp"
#include "scoregraph/io.hpp"

using namespace scoregraph;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "scoregraph");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("help matches the golden files") {
  auto top = run({"--help"});
  CHECK(top.code == 0);
  CHECK(top.out == slurp(GOLDEN_DIR "/help.txt"));
  auto all = run({"--help-all"});
  CHECK(all.code == 0);
  CHECK(all.out == slurp(GOLDEN_DIR "/help_all.txt"));
  for (const char* flag : {"--config", "--set", "--out", "--seed", "--verbose", "--json-errors", "--instance",
                           "--method", "--grid", "--tol", "--max-iters", "--trace", "--schedule", "--Q", "--steps",
                           "--consensus-tol", "--use-mean", "--paper-scale", "--threads", "--trials-out"}) {
    CHECK_MESSAGE(all.out.find(flag) != std::string::npos, flag);
  }
}

TEST_CASE("generate output feeds classify, estimate and distributed") {
  const std::string inst = "cli_test_instance.json";
  auto gen = run({"generate", "--seed", "5", "--set", "N=6", "--set", "n=20", "--out", inst});
  REQUIRE(gen.code == 0);
  auto j = read_json_file(inst);
  CHECK(j["N"] == 6);
  CHECK(j["edges"].size() == 20);

  auto cls = run({"classify", "--instance", inst});
  REQUIRE(cls.code == 0);
  std::istringstream lines(cls.out);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    auto row = Json::parse(line);
    CHECK(row["node"] == ++count);
    CHECK(row.contains("true"));
  }
  CHECK(count == 6);

  auto est = run({"estimate", "--instance", inst, "--method", "nr", "--grid", "4x4"});
  REQUIRE(est.code == 0);
  auto e = Json::parse(est.out);
  CHECK(e["method"] == "nr_centralized");
  CHECK(e["restarts"] == 16);

  CHECK(e["likelihood_gap"].get<double>() >= 0.0);

  auto ex = run({"estimate", "--instance", inst, "--method", "exact", "--grid", "2x2"});
  REQUIRE(ex.code == 0);
  auto x = Json::parse(ex.out);
  CHECK(x["log_likelihood"].get<double>() == doctest::Approx(x["objective"].get<double>()).epsilon(1e-9));

  auto dist = run({"distributed", "--instance", inst, "--schedule", "complete", "--steps", "2000"});
  CHECK(dist.code == 0);
  CHECK(dist.out.find("\"objective\"") != std::string::npos);
  CHECK(dist.out.find("\"map_mean\"") != std::string::npos);
  std::remove(inst.c_str());
}

TEST_CASE("sweep happy path") {
  const std::string cfg = "cli_test_cfg.json", out = "cli_test_results.csv";
  write_text_file(cfg, R"({"N": 5, "C": 3, "trials": 2, "edge_grid": [5, 20]})");
  auto r = run({"sweep", "--config", cfg, "--seed", "7", "--out", out});
  CHECK(r.code == 0);
  const auto csv = slurp(out);
  CHECK(csv.rfind("n,rmse_theta,rmse_gamma,misclass,oracle_misclass,se_misclass\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  std::remove(cfg.c_str());
  std::remove(out.c_str());
}

TEST_CASE("usage errors exit with 2") {
  auto noseed = run({"sweep", "--set", "N=5"});
  CHECK(noseed.code == 2);
  CHECK(noseed.err.find("--seed") != std::string::npos);

  auto c0 = run({"generate", "--seed", "1", "--set", "C=0"});
  CHECK(c0.code == 2);
  CHECK(c0.err.find("InvalidAlphabet") != std::string::npos);

  auto unknown = run({"sweep", "--seed", "1", "--set", "colour=red"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("colour") != std::string::npos);

  CHECK(run({"estimate"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"sweep", "--seed", "-3"}).code == 2);
}

TEST_CASE("runtime errors exit with 1") {
  auto missing = run({"classify", "--instance", "/nonexistent/instance.json"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("Io") != std::string::npos);
}

TEST_CASE("machine-readable errors") {
  auto r = run({"generate", "--seed", "1", "--set", "C=0", "--json-errors"});
  CHECK(r.code == 2);
  auto j = Json::parse(r.err);
  CHECK(j["error"]["code"] == "InvalidAlphabet");
  CHECK(j["error"]["exit"] == 2);
}
