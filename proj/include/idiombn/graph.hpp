#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "idiombn/error.hpp"

namespace idiombn {

// Normalization tolerance shared by build-time validation and inference.
inline constexpr double kProbabilityTolerance = 1e-9;

// Role a variable plays in clinical reasoning. Reliability and Synthetic
// house measurement-accuracy and definition/synthesis nodes.
enum class Role {
  Condition,
  Symptom,
  Sign,
  MedicalTest,
  RiskFactor,
  PathogenicMechanism,
  Treatment,
  Comorbidity,
  Complication,
  Reliability,
  Synthetic,
  Unclassified,
};

inline constexpr std::size_t kRoleCount = 12;

// Lower-case DSL spelling ("medical_test", "risk_factor", ...).
std::string_view role_name(Role role);
std::optional<Role> parse_role(std::string_view name);
std::span<const Role> all_roles();

// Symptom, Sign or MedicalTest.
bool is_manifestation(Role role);
// Condition or Comorbidity.
bool is_condition_like(Role role);

struct Variable {
  std::string name;
  std::vector<std::string> states;
  Role role = Role::Unclassified;

  std::optional<std::size_t> state_index(std::string_view label) const;
  std::size_t cardinality() const { return states.size(); }
};

struct Edge {
  std::string parent;
  std::string child;
  bool decision = false;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Conditional probability table. Rows are laid out in mixed-radix order over
// the parents' states, first parent most significant; each row holds one
// probability per child state.
struct Cpt {
  std::string child;
  std::vector<std::string> parents;
  std::vector<double> table;
};

// Map from variable name to state label.
using Assignment = std::map<std::string, std::string>;

// Index-based adjacency view of a DAG. Parents are stored in CPT order,
// children in edge declaration order.
struct Dag {
  std::vector<std::vector<std::size_t>> parents;
  std::vector<std::vector<std::size_t>> children;

  std::size_t size() const { return parents.size(); }
  Dag without_outgoing(std::size_t node) const;
};

enum class BuildErrorCode {
  EmptyName,
  DuplicateVariable,
  InvalidStates,
  UnknownVariable,
  SelfLoop,
  DuplicateEdge,
  DecisionArcTarget,
  CycleDetected,
  MissingCpt,
  DuplicateCpt,
  CptMismatch,
  RowCountMismatch,
  InvalidProbability,
  RowNotNormalized,
};

std::string_view to_string(BuildErrorCode code);

struct BuildError {
  BuildErrorCode code;
  std::string message;
  // Variables implicated; for CycleDetected the cycle in edge order.
  std::vector<std::string> nodes;
  // RowNotNormalized only.
  std::optional<std::size_t> row;
  std::optional<double> sum;
};

// A validated, immutable discrete Bayesian network. Only `build_network`
// creates one; every transformation returns a new network.
class BayesNet {
 public:
  BayesNet() = default;

  std::size_t size() const { return variables_.size(); }
  bool empty() const { return variables_.empty(); }

  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& variable(std::size_t index) const { return variables_.at(index); }
  const Variable& variable(std::string_view name) const { return variables_[index_of(name)]; }

  // Throws Error(UnknownVariable).
  std::size_t index_of(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }

  const std::vector<Edge>& edges() const { return edges_; }
  bool has_edge(std::string_view parent, std::string_view child) const;
  bool is_decision_edge(std::string_view parent, std::string_view child) const;

  const Dag& dag() const { return dag_; }
  const std::vector<std::size_t>& parents(std::size_t index) const { return dag_.parents[index]; }
  const std::vector<std::size_t>& children(std::size_t index) const { return dag_.children[index]; }

  const std::vector<Cpt>& cpts() const { return cpts_; }
  const Cpt& cpt(std::size_t index) const { return cpts_[index]; }
  const Cpt& cpt(std::string_view name) const { return cpts_[index_of(name)]; }

  // Row of `index`'s CPT for the given parent state indices (CPT order).
  std::span<const double> row(std::size_t index, std::span<const std::size_t> parent_states) const;

  // Translates a name-keyed assignment into state indices. Throws
  // UnknownVariable / UnknownState.
  std::vector<std::pair<std::size_t, std::size_t>> resolve(const Assignment& assignment) const;

 private:
  friend struct NetworkBuilder;

  std::vector<Variable> variables_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Edge> edges_;
  Dag dag_;
  std::vector<Cpt> cpts_;
};

class BuildResult {
 public:
  explicit BuildResult(BayesNet net) : net_(std::move(net)) {}
  explicit BuildResult(std::vector<BuildError> errors) : errors_(std::move(errors)) {}

  bool ok() const { return net_.has_value(); }
  explicit operator bool() const { return ok(); }
  const std::vector<BuildError>& errors() const { return errors_; }

  // Throws Error(InvalidNetwork) summarizing every build error.
  const BayesNet& value() const&;
  BayesNet value() &&;

 private:
  std::optional<BayesNet> net_;
  std::vector<BuildError> errors_;
};

// Validates and assembles a network. All violations are reported, not just
// the first. Decision arcs are edges with `decision` set; their child must
// carry Role::Treatment.
BuildResult build_network(std::vector<Variable> variables, std::vector<Edge> edges, std::vector<Cpt> cpts);

// Kahn order with ties broken by declaration order.
std::vector<std::string> topological_order(const BayesNet& net);
std::vector<std::size_t> topological_indices(const Dag& dag);

// Returns one directed cycle (node indices, first node repeated implicitly)
// or nothing when the graph is acyclic.
std::optional<std::vector<std::size_t>> find_cycle(const std::vector<std::vector<std::size_t>>& children);

// True iff every trail between X and Y is blocked by Z.
// Throws EmptyQuerySet, OverlappingSets, UnknownVariable.
bool d_separated(const BayesNet& net, const std::vector<std::string>& x, const std::vector<std::string>& y,
                 const std::vector<std::string>& z);
bool d_separated(const Dag& dag, const std::vector<std::size_t>& x, const std::vector<std::size_t>& y,
                 const std::vector<std::size_t>& z);

std::vector<std::string> descendants(const BayesNet& net, std::string_view name);
std::vector<std::string> ancestors(const BayesNet& net, std::string_view name);
std::vector<bool> descendant_mask(const Dag& dag, std::span<const std::size_t> roots);
std::vector<bool> ancestor_mask(const Dag& dag, std::span<const std::size_t> roots);

// Chain-rule product of CPT entries. Throws IncompleteAssignment.
double joint_probability(const BayesNet& net, const Assignment& full_assignment);
double joint_probability(const BayesNet& net, std::span<const std::size_t> states);

}  // namespace idiombn
