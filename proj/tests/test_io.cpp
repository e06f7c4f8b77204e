#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "scoregraph/errors.hpp"
#include "scoregraph/io.hpp"

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

TEST_CASE("instance round trip with one-based indices") {
  auto fam = social_ranking_family(3, 4);
  auto g = random_score_graph(6, 17, 2);
  auto r = sample_realization(g, fam, Params::scalar(0.2, 0.3), 2);
  Json j = instance_to_json(g, r, fam.alphabet);
  CHECK(j["edges"][0][0].get<int>() == 1);
  for (const auto& t : j["edges"]) {
    CHECK(t[2].get<int>() >= 1);
    CHECK(t[2].get<int>() <= 4);
  }
  auto back = instance_from_json(Json::parse(j.dump()));
  CHECK(back.has_states);
  CHECK(back.graph.edges() == g.edges());
  CHECK(back.realization.scores == r.scores);
  CHECK(back.realization.states == r.states);
  CHECK(back.alphabet.num_scores == 4);

  auto bare = instance_to_json(g, r, fam.alphabet, false);
  CHECK_FALSE(bare.contains("states"));
  CHECK_FALSE(instance_from_json(bare).has_states);
}

TEST_CASE("unsorted edge triples map onto the canonical order") {
  Json j = Json::parse(R"({"N": 3, "C": 2, "R": 3, "edges": [[3, 1, 1], [1, 2, 3], [2, 3, 2]]})");
  auto inst = instance_from_json(j);
  CHECK(inst.realization.scores[inst.graph.edge_index(2, 0)] == 0);
  CHECK(inst.realization.scores[inst.graph.edge_index(0, 1)] == 2);
}

TEST_CASE("malformed instances") {
  CHECK(code_of([] { instance_from_json(Json::parse(R"({"N": 2, "C": 2, "R": 2, "edges": [], "x": 1})")); }) ==
        ErrorCode::InvalidConfig);
  CHECK(code_of([] { instance_from_json(Json::parse(R"({"N": 2, "C": 0, "R": 2, "edges": []})")); }) ==
        ErrorCode::InvalidAlphabet);
  CHECK(code_of([] { instance_from_json(Json::parse(R"({"N": 2, "C": 2, "R": 2, "edges": [[1, 2, 3], [2, 1, 1]]})")); }) ==
        ErrorCode::IndexOutOfRange);
  CHECK(code_of([] { instance_from_json(Json::parse(R"({"N": 2, "C": 2, "R": 2, "edges": [[1, 2, 1]]})")); }) ==
        ErrorCode::IsolatedInNode);
  CHECK(code_of([] { instance_from_json(Json::parse(R"({"N": 2, "C": 2, "R": 2, "edges": [[1, 2]]})")); }) ==
        ErrorCode::InvalidConfig);
  CHECK(code_of([] {
          instance_from_json(Json::parse(R"({"N": 2, "C": 2, "R": 2, "edges": [[1, 2, 1], [2, 1, 1]], "states": [1]})"));
        }) == ErrorCode::InvalidConfig);
}

TEST_CASE("family spec") {
  auto spec = family_spec_from_json(Json::parse(R"({"C": 6, "theta": 0.4, "other": 1})"));
  CHECK(spec.C == 6);
  CHECK(spec.theta == 0.4);
  CHECK(spec.R == 3);
  CHECK(spec.build().num_states() == 6);
  FamilySpec sq;
  sq.distance = "squared";
  CHECK_NOTHROW(sq.build());
  FamilySpec bad;
  bad.distance = "cosine";
  CHECK(code_of([&] { bad.build(); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { family_spec_from_json(Json::parse(R"({"C": "six"})")); }) == ErrorCode::InvalidConfig);
  CHECK(family_spec_from_json(to_json(spec)).theta == 0.4);
}

TEST_CASE("overrides") {
  Json j = Json::object();
  apply_override(j, "N=12");
  apply_override(j, "a.b=0.5");
  apply_override(j, "name=hello");
  apply_override(j, "grid=[1,2,3]");
  CHECK(j["N"] == 12);
  CHECK(j["a"]["b"] == 0.5);
  CHECK(j["name"] == "hello");
  CHECK(j["grid"].size() == 3);
  CHECK(code_of([&] { apply_override(j, "novalue"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { apply_override(j, "a..b=1"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("files") {
  CHECK(code_of([] { read_json_file("/nonexistent/file.json"); }) == ErrorCode::Io);
  const std::string path = "scoregraph_io_test.json";
  write_text_file(path, "{not json");
  CHECK(code_of([&] { read_json_file(path); }) == ErrorCode::InvalidConfig);
  write_text_file(path, R"({"x": [1, 2]})");
  CHECK(read_json_file(path)["x"][1] == 2);
  std::remove(path.c_str());
  CHECK(code_of([] { write_text_file("/nonexistent/dir/out.txt", "x"); }) == ErrorCode::Io);
}
