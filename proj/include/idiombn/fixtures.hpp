#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idiombn/causal.hpp"
#include "idiombn/graph.hpp"
#include "idiombn/idioms.hpp"
#include "idiombn/model_format.hpp"

namespace idiombn {

struct ExpectedQuery {
  std::string description;
  QueryMode mode = QueryMode::Observational;
  // For counterfactual queries the target names the actual-world variable;
  // the probability is that of its hypothetical copy.
  std::string target;
  std::string state;
  Evidence evidence;
  Intervention intervention;
  double probability = 0.0;
  double tolerance = 1e-6;
};

struct ExpectedLint {
  std::size_t errors = 0;
  std::size_t warnings = 0;
  // Exact finding counts per rule id; rules not listed must not fire.
  std::map<std::string, std::size_t> by_rule;
};

struct FixtureInfo {
  std::string id;
  std::string file;
  std::string description;
  // What the fixture illustrates (idiom or worked example).
  std::string anchor;
  std::vector<ExpectedQuery> queries;
  ExpectedLint lint;
  // Every edge comes from an idiom instance.
  bool fully_covered = false;
};

struct Fixture {
  FixtureInfo info;
  std::string source;
  ModelDocument document;
  BayesNet net;
  std::vector<IdiomInstance> instances;
};

const std::vector<FixtureInfo>& fixture_registry();
const FixtureInfo& fixture_info(std::string_view id);

// The fixtures/ directory configured at build time.
std::string default_fixture_dir();

// Throws UnknownFixture, Io, InvalidNetwork.
Fixture load_fixture(std::string_view id, const std::string& dir = default_fixture_dir());

struct LoadedModel {
  std::string source;
  ModelDocument document;
  BayesNet net;
  std::vector<IdiomInstance> instances;
  std::vector<Diagnostic> diagnostics;
};

// Reads, parses and elaborates a model file. Throws Io when unreadable and
// InvalidNetwork (message carries the formatted diagnostics) on errors.
LoadedModel load_model(const std::string& path);

}  // namespace idiombn
