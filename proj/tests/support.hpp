#pragma once

#include <random>
#include <string>
#include <vector>

#include "idiombn/causal.hpp"
#include "idiombn/fixtures.hpp"
#include "idiombn/graph.hpp"
#include "idiombn/inference.hpp"
#include "idiombn/linter.hpp"
#include "idiombn/idioms.hpp"

namespace testing_support {

using namespace idiombn;

// Brute-force joint enumeration written independently of the library's
// inference code: it walks every full assignment and multiplies CPT entries
// located by its own index arithmetic.
std::vector<double> oracle_posterior(const BayesNet& net, const std::string& target, const Evidence& evidence);
double oracle_probability(const BayesNet& net, const Evidence& evidence);

// Largest |P(x, y | z) - P(x | z) P(y | z)| over all joint states x, y and
// every z with positive probability.
double dependence(const BayesNet& net, const std::vector<std::size_t>& x, const std::vector<std::size_t>& y,
                  const std::vector<std::size_t>& z);

struct RandomNetOptions {
  std::size_t min_nodes = 2;
  std::size_t max_nodes = 12;
  std::size_t max_states = 2;
  double edge_probability = 0.35;
  std::size_t max_parents = 4;
  // CPT entries are drawn in [floor, 1 - floor] before normalization.
  double floor = 0.02;
  // Round CPT entries to this many decimals (0 keeps full precision).
  int decimals = 0;
  bool random_roles = false;
};

BayesNet random_network(std::mt19937& rng, const RandomNetOptions& options = {});
Evidence random_evidence(std::mt19937& rng, const BayesNet& net, std::size_t max_size, const std::string& exclude = {});

// Same variables (name, states, role), same edges with decision flags, and
// CPTs equal entrywise within `tolerance` (0 means exact).
bool same_network(const BayesNet& a, const BayesNet& b, double tolerance = 0.0, std::string* why = nullptr);

std::string fixture_dir();

// Counts findings per rule id.
std::map<std::string, std::size_t> rule_counts(const std::vector<Finding>& findings);

// Recursive-descent check against the DOT grammar subset the exporter may
// use (digraph, subgraphs, node/edge/attribute statements, comments).
// Returns an empty string on success, else the first problem found.
std::string check_dot_syntax(const std::string& dot);

// Network over a fragment's variables and edges: binary states, each variable
// taking its first role, uniform CPTs.
BayesNet net_from_fragment(const Fragment& fragment);

struct SoundnessSweep {
  std::size_t instantiations = 0;
  // One line per instantiation on which R1, R2, R5 or R6 fired.
  std::vector<std::string> violations;
};

// Lints every role-conforming instantiation of a template: each optional slot
// bound or not, Many slots bound to one or two variables, every variable
// taking every allowed role of its slot.
SoundnessSweep template_soundness(TemplateId id);

}  // namespace testing_support
