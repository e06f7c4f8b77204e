#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "scoregraph/errors.hpp"
#include "scoregraph/graph.hpp"
#include "scoregraph/model.hpp"

using namespace scoregraph;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("three-cycle builds") {
  auto g = build_score_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  CHECK(g.num_edges() == 3);
  for (int i = 0; i < 3; ++i) CHECK(g.in_degree(i) == 1);
}

TEST_CASE("edges are sorted lexicographically") {
  auto g = build_score_graph(3, {{2, 0}, {1, 2}, {0, 1}, {0, 2}});
  CHECK(std::is_sorted(g.edges().begin(), g.edges().end()));
  CHECK(g.edge_index(0, 2) == 1);
  CHECK(g.edge_index(2, 1) == -1);
}

TEST_CASE("graph validation errors") {
  CHECK(code_of([] { build_score_graph(2, {{0, 1}}); }) == ErrorCode::IsolatedInNode);
  CHECK(code_of([] { build_score_graph(2, {{0, 1}, {1, 0}, {0, 1}}); }) == ErrorCode::DuplicateEdge);
  CHECK(code_of([] { build_score_graph(2, {{0, 0}, {1, 0}}); }) == ErrorCode::SelfLoop);
  CHECK(code_of([] { build_score_graph(2, {{0, 2}, {1, 0}}); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("four-node neighbor partition") {
  // 0<->1 mutual, 2->0 only, 0->3 only, plus what keeps in-degrees positive
  auto g = build_score_graph(4, {{0, 1}, {1, 0}, {2, 0}, {0, 3}, {3, 2}});
  Realization r{{0, 0, 0, 0}, {}};
  r.scores.assign(g.num_edges(), 0);
  r.scores[g.edge_index(0, 1)] = 1;
  r.scores[g.edge_index(1, 0)] = 2;
  r.scores[g.edge_index(2, 0)] = 0;
  r.scores[g.edge_index(0, 3)] = 2;
  auto s = compute_node_stats(g, r, 3, 0);
  CHECK(s.mutual_counts.sum() == 1);
  CHECK(s.mutual_counts(1, 2) == 1);
  CHECK(s.in_counts.sum() == 1);
  CHECK(s.in_counts[0] == 1);
  CHECK(s.out_counts.sum() == 1);
  CHECK(s.out_counts[2] == 1);
  CHECK(s.total_in_counts.sum() == 2);

  auto s1 = compute_node_stats(g, r, 3, 1);
  CHECK(s1.mutual_counts(2, 1) == 1);
}

TEST_CASE("three-cycle stats have no mutual pairs") {
  auto g = build_score_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  Realization r{{0, 0, 0}, {0, 1, 0}};
  auto s = compute_node_stats(g, r, 3, 0);
  CHECK(s.mutual_counts.sum() == 0);
  CHECK(s.in_counts[0] == 1);
  CHECK(s.out_counts[0] == 1);
  CHECK(code_of([&] { compute_node_stats(g, r, 3, 3); }) == ErrorCode::UnknownNode);
}

TEST_CASE("random_score_graph budget and shape") {
  CHECK(code_of([] { random_score_graph(5, 25, 1); }) == ErrorCode::EdgeBudgetOutOfRange);
  CHECK(code_of([] { random_score_graph(5, 4, 1); }) == ErrorCode::EdgeBudgetOutOfRange);

  auto cyc = random_score_graph(300, 300, 3);
  CHECK(cyc.num_edges() == 300);
  for (int i = 0; i < 300; ++i) CHECK(cyc.has_edge(i, (i + 1) % 300));

  auto full = random_score_graph(30, 30 * 29, 3);
  CHECK(full.num_edges() == 870);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = random_score_graph(12, 12 + static_cast<std::int64_t>(seed * 6), seed);
    CHECK(g.num_edges() == 12 + static_cast<int>(seed) * 6);
    for (int i = 0; i < 12; ++i) CHECK(g.has_edge(i, (i + 1) % 12));
    CHECK_NOTHROW(build_score_graph(12, g.edges()));
  }
  auto a = random_score_graph(20, 100, 9), b = random_score_graph(20, 100, 9);
  CHECK(a.edges() == b.edges());
}

TEST_CASE("node stats agree with an edge scan") {
  auto family = social_ranking_family(3, 3);
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const int N = 4 + static_cast<int>(seed % 7);
    auto g = random_score_graph(N, N + static_cast<std::int64_t>((seed * 7) % (N * N - 2 * N + 1)), seed);
    auto r = sample_realization(g, family, Params::scalar(0.3, 0.4), seed);
    for (int i = 0; i < N; ++i) {
      auto s = compute_node_stats(g, r, 3, i);
      auto o = oracle::scan_stats(g, r.scores, 3, i);
      for (int h = 0; h < 3; ++h) {
        CHECK(s.in_counts[h] == o.in_only[h]);
        CHECK(s.out_counts[h] == o.out_only[h]);
        CHECK(s.total_in_counts[h] == o.total_in[h]);
        for (int k = 0; k < 3; ++k) CHECK(s.mutual_counts(h, k) == o.mutual[h][k]);
      }
      CHECK(s.mutual_counts.sum() + s.in_counts.sum() == g.in_degree(i));
      CHECK(s.mutual_counts.sum() + s.out_counts.sum() == g.out_degree(i));
    }
  }
}

TEST_CASE("node stats ignore edge list order") {
  auto family = social_ranking_family(3, 3);
  auto g = random_score_graph(9, 40, 4);
  auto r = sample_realization(g, family, Params::scalar(0.3, 0.4), 4);
  std::vector<Edge> shuffled = g.edges();
  std::mt19937 gen(11);
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  auto g2 = build_score_graph(9, shuffled);
  Realization r2 = r;
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto& ed = g.edges()[e];
    r2.scores[g2.edge_index(ed.from, ed.to)] = r.scores[e];
  }
  for (int i = 0; i < 9; ++i) {
    auto a = compute_node_stats(g, r, 3, i), b = compute_node_stats(g2, r2, 3, i);
    CHECK(a.mutual_counts == b.mutual_counts);
    CHECK(a.in_counts == b.in_counts);
    CHECK(a.out_counts == b.out_counts);
  }
}

TEST_CASE("sampling degenerate priors") {
  auto g = random_score_graph(15, 40, 2);
  auto one = social_ranking_family(1, 3);
  auto r1 = sample_realization(g, one, Params::scalar(0.2, 0.3), 5);
  CHECK(std::all_of(r1.states.begin(), r1.states.end(), [](int s) { return s == 0; }));

  auto fam = social_ranking_family(4, 3);
  auto r0 = sample_realization(g, fam, Params::scalar(0.2, 0.0), 5);
  CHECK(std::all_of(r0.states.begin(), r0.states.end(), [](int s) { return s == 0; }));
  auto rc = sample_realization(g, fam, Params::scalar(0.2, 1.0), 5);
  CHECK(std::all_of(rc.states.begin(), rc.states.end(), [](int s) { return s == 3; }));

  CHECK(code_of([&] { sample_realization(g, fam, Params::scalar(0.2, 1.5), 5); }) ==
        ErrorCode::InfeasibleParams);
}

TEST_CASE("state histogram matches the binomial pmf") {
  auto g = random_score_graph(300, 300, 8);
  auto fam = social_ranking_family(6, 3);
  auto r = sample_realization(g, fam, Params::scalar(0.2, 0.3), 8);
  const auto pmf = oracle::prior(0.3, 6);
  std::vector<int> hist(6, 0);
  for (int s : r.states) ++hist[s];
  for (int k = 0; k < 6; ++k) {
    const double mean = 300 * pmf[k], sd = std::sqrt(300 * pmf[k] * (1 - pmf[k]));
    CHECK(std::abs(hist[k] - mean) <= 3 * sd + 1e-9);
  }
}

TEST_CASE("sampling is reproducible and stable under graph growth") {
  auto fam = social_ranking_family(3, 3);
  auto g = random_score_graph(10, 30, 1);
  auto a = sample_realization(g, fam, Params::scalar(0.2, 0.3), 77);
  auto b = sample_realization(g, fam, Params::scalar(0.2, 0.3), 77);
  CHECK(a.states == b.states);
  CHECK(a.scores == b.scores);

  std::vector<Edge> more = g.edges();
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      if (i != j && !g.has_edge(i, j) && more.size() < 60) more.push_back({i, j});
    }
  }
  auto big = build_score_graph(10, more);
  auto c = sample_realization(big, fam, Params::scalar(0.2, 0.3), 77);
  CHECK(c.states == a.states);
  for (int e = 0; e < g.num_edges(); ++e) {
    CHECK(c.scores[big.edge_index(g.edges()[e].from, g.edges()[e].to)] == a.scores[e]);
  }
}
