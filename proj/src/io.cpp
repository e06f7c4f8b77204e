#include "scoregraph/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "scoregraph/errors.hpp"

namespace scoregraph {

namespace {

int get_int(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidConfig, std::string("missing key \"") + key + "\"");
  const Json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::InvalidConfig, std::string("\"") + key + "\" must be an integer");
  }
  return v.get<int>();
}

}  // namespace

Json instance_to_json(const ScoreGraph& graph, const Realization& realization,
                      const AlphabetSpec& alphabet, bool with_states) {
  Json j;
  j["N"] = graph.num_nodes();
  j["C"] = alphabet.num_states;
  j["R"] = alphabet.num_scores;
  Json edges = Json::array();
  for (int k = 0; k < graph.num_edges(); ++k) {
    const Edge& e = graph.edges()[k];
    edges.push_back({e.from + 1, e.to + 1, realization.scores[k] + 1});
  }
  j["edges"] = std::move(edges);
  if (with_states && !realization.states.empty()) {
    Json states = Json::array();
    for (int s : realization.states) states.push_back(s + 1);
    j["states"] = std::move(states);
  }
  return j;
}

Instance instance_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "instance must be a JSON object");
  reject_unknown_keys(j, {"N", "C", "R", "edges", "states"}, "instance");
  Instance inst;
  const int N = get_int(j, "N");
  inst.alphabet = AlphabetSpec::numeric(get_int(j, "C"), get_int(j, "R"));
  inst.alphabet.validate();
  if (!j.contains("edges") || !j["edges"].is_array()) {
    throw Error(ErrorCode::InvalidConfig, "\"edges\" must be an array of [i, j, h] triples");
  }

  struct Scored {
    Edge edge;
    int score;
  };
  std::vector<Scored> scored;
  for (const auto& t : j["edges"]) {
    if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() ||
        !t[1].is_number_integer() || !t[2].is_number_integer()) {
      throw Error(ErrorCode::InvalidConfig, "edge entries must be [i, j, h] integer triples");
    }
    const int h = t[2].get<int>();
    if (h < 1 || h > inst.alphabet.num_scores) {
      throw Error(ErrorCode::IndexOutOfRange, "score " + std::to_string(h) + " outside 1.." +
                                                  std::to_string(inst.alphabet.num_scores));
    }
    scored.push_back({{t[0].get<int>() - 1, t[1].get<int>() - 1}, h - 1});
  }
  std::vector<Edge> edges;
  edges.reserve(scored.size());
  for (const auto& s : scored) edges.push_back(s.edge);
  inst.graph = build_score_graph(N, edges);

  // scores follow the canonical edge order of the graph
  inst.realization.scores.assign(scored.size(), 0);
  for (const auto& s : scored) inst.realization.scores[inst.graph.edge_index(s.edge.from, s.edge.to)] = s.score;

  if (j.contains("states")) {
    const Json& st = j["states"];
    if (!st.is_array() || static_cast<int>(st.size()) != N) {
      throw Error(ErrorCode::InvalidConfig, "\"states\" must list one state per node");
    }
    for (const auto& s : st) {
      if (!s.is_number_integer()) throw Error(ErrorCode::InvalidConfig, "states must be integers");
      inst.realization.states.push_back(s.get<int>() - 1);
    }
    inst.has_states = true;
  }
  inst.realization.validate(inst.graph, inst.alphabet);
  return inst;
}

ModelFamily FamilySpec::build() const {
  if (family != "social_ranking") {
    throw Error(ErrorCode::InvalidConfig, "unknown family \"" + family + "\"");
  }
  AlphabetSpec::numeric(C, R).validate();
  if (distance == "absdiff") return social_ranking_family(C, R, absdiff_distance());
  if (distance == "squared") {
    return social_ranking_family(C, R, [](int l, int m) { return double(l - m) * double(l - m); });
  }
  throw Error(ErrorCode::InvalidConfig, "unknown distance \"" + distance + "\"");
}

FamilySpec family_spec_from_json(const Json& j, FamilySpec spec) {
  try {
    if (j.contains("family")) spec.family = j.at("family").get<std::string>();
    if (j.contains("C")) spec.C = j.at("C").get<int>();
    if (j.contains("R")) spec.R = j.at("R").get<int>();
    if (j.contains("theta")) spec.theta = j.at("theta").get<double>();
    if (j.contains("gamma")) spec.gamma = j.at("gamma").get<double>();
    if (j.contains("distance")) spec.distance = j.at("distance").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return spec;
}

Json to_json(const FamilySpec& spec) {
  return {{"family", spec.family}, {"C", spec.C},         {"R", spec.R},
          {"theta", spec.theta},   {"gamma", spec.gamma}, {"distance", spec.distance}};
}

void reject_unknown_keys(const Json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::InvalidConfig, "unknown key \"" + key + "\" in " + where);
    }
  }
}

void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::InvalidConfig, "override \"" + assignment + "\" is not key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw Error(ErrorCode::InvalidConfig, "empty key in override \"" + path + "\"");
    if (!node->is_object()) node->operator=(Json::object());
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Json j = Json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::InvalidConfig, path + " is not valid JSON");
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

}  // namespace scoregraph
