#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idiombn/graph.hpp"

namespace idiombn {

// Catalog order; also the tie-break order for idiom suggestions.
enum class TemplateId {
  Manifestation,
  ManifestationReliability,
  RiskFactor,
  Pathogenesis,
  ComorbidityCommonCause,
  ComorbidityCommonSymptomology,
  Complication,
  Treatment,
  TreatmentReliability,
  CounterfactualTreatment,
  CauseConsequence,
  Measurement,
  DefinitionSynthesis,
  Induction,
};

inline constexpr std::size_t kTemplateCount = 14;

std::string_view template_name(TemplateId id);
std::optional<TemplateId> parse_template(std::string_view name);

enum class Arity { One, Many };

struct Slot {
  std::string name;
  Arity arity = Arity::One;
  // Optional slots may be left unbound.
  bool optional = false;
  // First entry is the canonical role for fragments built without role data.
  std::vector<Role> allowed_roles;

  bool allows(Role role) const;
};

struct EdgeSchema {
  std::string from_slot;
  std::string to_slot;
  bool decision = false;
};

struct IdiomTemplate {
  TemplateId id;
  std::vector<Slot> slots;
  std::vector<EdgeSchema> edges;
  // Generic (domain-independent) idioms are CauseConsequence, Measurement,
  // DefinitionSynthesis and Induction.
  bool generic = false;
  // Counterfactual treatment schema is meant for twin-network use.
  bool twin_network = false;

  const Slot* slot(std::string_view name) const;
};

// Slot name -> bound variable names.
using Bindings = std::map<std::string, std::vector<std::string>>;

struct IdiomInstance {
  TemplateId template_id;
  Bindings bindings;
  // Free-text label; the instance name in model files.
  std::string label;
};

struct FragmentVariable {
  std::string name;
  // Sorted, unique. More than one entry is a multi-role annotation.
  std::vector<Role> roles;

  friend bool operator==(const FragmentVariable&, const FragmentVariable&) = default;
};

struct FragmentEdge {
  std::string parent;
  std::string child;
  bool decision = false;
  // Labels of the fragments that contributed this edge, sorted.
  std::vector<std::string> sources;

  friend bool operator==(const FragmentEdge&, const FragmentEdge&) = default;
};

// A graph piece keyed by variable name. Variables and edges are kept sorted
// by name so composition is order-independent.
struct Fragment {
  std::vector<FragmentVariable> variables;
  std::vector<FragmentEdge> edges;
  std::vector<std::string> warnings;

  const FragmentVariable* variable(std::string_view name) const;
  bool has_edge(std::string_view parent, std::string_view child) const;
};

// Variable name -> declared role, used to check bindings.
using RoleLookup = std::map<std::string, Role, std::less<>>;

const std::vector<IdiomTemplate>& catalog();
const IdiomTemplate& find_template(TemplateId id);

// Expands bindings into a fragment. Role mismatches are warnings; without
// `roles` each variable takes its slot's canonical role.
// Throws UnknownSlot, MissingSlot, ArityViolation, DuplicateBinding.
Fragment instantiate(TemplateId id, const Bindings& bindings, const RoleLookup* roles = nullptr,
                     const std::string& label = {});
Fragment instantiate(const IdiomInstance& instance, const RoleLookup* roles = nullptr);

// Union keyed by name; duplicate edges merge with OR-ed decision flags.
// Throws CompositionCycle naming the cycle and the fragments behind each edge.
Fragment compose(const std::vector<Fragment>& fragments);

struct SuggestionHints {
  std::optional<bool> mediator_observable;
  std::optional<bool> human_reported;
  std::optional<bool> temporal_late_effect;
};

// Rule-table idiom selection for a group of role-tagged variables, most
// specific first, ties by catalog order, CauseConsequence last.
// Throws EmptyGroup.
std::vector<TemplateId> suggest_idiom(const std::vector<std::pair<std::string, Role>>& group,
                                      const SuggestionHints& hints = {});

}  // namespace idiombn
