#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "idiombn/graph.hpp"

namespace idiombn {

// Evidence below this marginal probability is treated as contradictory.
inline constexpr double kImpossibleEvidenceThreshold = 1e-12;

// Joint enumeration is refused above this many variables.
inline constexpr std::size_t kMaxEnumerationVariables = 20;

// Hard evidence only.
using Evidence = Assignment;

struct Distribution {
  std::string variable;
  std::vector<std::string> states;
  std::vector<double> probabilities;

  // Throws UnknownState.
  double operator[](std::string_view state) const;
};

// Exact posterior by summing the joint over every completion of the
// evidence. Independent oracle for the elimination engine.
// Throws TooLarge, ImpossibleEvidence, UnknownVariable, UnknownState.
Distribution enumerate_posterior(const BayesNet& net, std::string_view target, const Evidence& evidence);

// Exact posterior by variable elimination (min-fill order, declaration-order
// ties). Evidence on the target itself yields a point mass.
Distribution posterior(const BayesNet& net, std::string_view target, const Evidence& evidence);

// P(evidence); 1 for empty evidence.
double evidence_probability(const BayesNet& net, const Evidence& evidence);

std::map<std::string, Distribution> batch_query(const BayesNet& net, const std::vector<std::string>& targets,
                                                const Evidence& evidence);

}  // namespace idiombn
