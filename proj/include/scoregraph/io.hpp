#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "scoregraph/graph.hpp"
#include "scoregraph/model.hpp"

namespace scoregraph {

using Json = nlohmann::json;

/// Instance file: {"N", "C", "R", "edges": [[i, j, h], ...], "states": [...]}
/// with 1-based node, score and state indices and edges sorted by (i, j).
struct Instance {
  AlphabetSpec alphabet;
  ScoreGraph graph;
  Realization realization;
  bool has_states = false;
};

Json instance_to_json(const ScoreGraph& graph, const Realization& realization,
                      const AlphabetSpec& alphabet, bool with_states = true);
/// Throws Error{InvalidConfig} on malformed input and the graph/alphabet
/// validation errors otherwise.
Instance instance_from_json(const Json& j);

/// Model family selection as it appears in config files.
struct FamilySpec {
  std::string family = "social_ranking";
  int C = 3;
  int R = 3;
  double theta = 0.2;
  double gamma = 0.3;
  std::string distance = "absdiff";  // absdiff | squared

  ModelFamily build() const;
  Params params() const { return Params::scalar(theta, gamma); }
};

/// Reads the family keys from a config object; other keys are ignored here.
FamilySpec family_spec_from_json(const Json& j, FamilySpec defaults = {});
Json to_json(const FamilySpec& spec);

/// Throws Error{InvalidConfig} naming the first key of j that is not allowed.
void reject_unknown_keys(const Json& j, const std::vector<std::string>& allowed,
                         const std::string& where);

/// Applies "a.b.c=value"; value is parsed as JSON when possible and kept as a
/// string otherwise. Throws Error{InvalidConfig} on a malformed override.
void apply_override(Json& j, const std::string& assignment);

/// Throws Error{Io} when the file cannot be read, Error{InvalidConfig} when
/// it is not valid JSON.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace scoregraph
