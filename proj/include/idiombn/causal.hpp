#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "idiombn/graph.hpp"
#include "idiombn/inference.hpp"

namespace idiombn {

// do-targets and the states they are forced to.
using Intervention = Assignment;

enum class QueryMode { Observational, Interventional, Counterfactual };

std::string_view to_string(QueryMode mode);

// Suffix naming hypothetical-world copies in a twin network.
inline constexpr std::string_view kHypotheticalSuffix = "'";

struct CausalQueryResult {
  Distribution distribution;
  QueryMode mode = QueryMode::Observational;
  // Edges cut by graph surgery (or by decision-arc removal in the twin).
  std::vector<Edge> removed_edges;
  // Set only for backdoor-adjusted results.
  std::vector<std::string> adjustment_set;
  // Human-readable caveats about the semantics used.
  std::vector<std::string> notes;
};

// Cuts every in-edge of each intervened variable and replaces its CPT by a
// point mass on the forced state. Throws EmptyIntervention, UnknownVariable,
// UnknownState.
BayesNet do_surgery(const BayesNet& net, const Intervention& intervention);

// Posterior of `target` in the mutilated network, with the forced states
// entered as observations. Throws EvidenceInterventionOverlap plus
// everything `posterior` throws.
CausalQueryResult interventional_query(const BayesNet& net, std::string_view target,
                                       const Intervention& intervention, const Evidence& evidence = {});

// True iff Z d-separates treatment from target once treatment's outgoing
// edges are removed. Throws InvalidAdjustmentSet when Z holds the treatment,
// the target, or a descendant of the treatment.
bool backdoor_blocked(const BayesNet& net, std::string_view treatment, std::string_view target,
                      const std::vector<std::string>& adjustment);

// sum_z P(target | treatment = forced, Z = z) P(Z = z). Throws BackdoorOpen
// when Z does not block every backdoor path.
Distribution backdoor_adjust(const BayesNet& net, std::string_view target, std::string_view treatment,
                             std::string_view forced_state, const std::vector<std::string>& adjustment);

struct TwinNetwork {
  BayesNet net;
  // Non-descendants of the intervention targets, present once.
  std::vector<std::string> shared;
  // Original (actual-world) name -> hypothetical copy name.
  std::map<std::string, std::string> hypothetical;
  Intervention intervention;
  // Decision arcs removed from the actual world.
  std::vector<Edge> removed_actual_edges;

  const std::string& hypothetical_name(const std::string& name) const;
};

// Duplicates the intervention targets and their descendants into a
// hypothetical world; everything else is shared. Hypothetical targets lose
// their parents and are forced. With `counterfactual_treatment_mode`, decision
// arcs into Treatment-role targets are removed in the actual world as well.
TwinNetwork build_twin(const BayesNet& net, const Intervention& intervention, bool counterfactual_treatment_mode);

// Actual-world evidence, hypothetical-world intervention, posterior of the
// hypothetical copy of `target`. Decision-arc removal in the actual world is
// enabled automatically when any intervention target is a Treatment.
// Intervention keys and the target may be written with the hypothetical
// suffix (`Medication'`).
CausalQueryResult counterfactual_query(const BayesNet& net, const Evidence& actual_evidence,
                                       const Intervention& intervention, std::string_view target);

}  // namespace idiombn
