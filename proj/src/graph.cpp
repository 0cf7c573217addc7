#include "idiombn/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <queue>
#include <set>
#include <sstream>

namespace idiombn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::IncompleteAssignment: return "IncompleteAssignment";
    case ErrorCode::OverlappingSets: return "OverlappingSets";
    case ErrorCode::EmptyQuerySet: return "EmptyQuerySet";
    case ErrorCode::InvalidNetwork: return "InvalidNetwork";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ImpossibleEvidence: return "ImpossibleEvidence";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::UnknownSlot: return "UnknownSlot";
    case ErrorCode::MissingSlot: return "MissingSlot";
    case ErrorCode::ArityViolation: return "ArityViolation";
    case ErrorCode::DuplicateBinding: return "DuplicateBinding";
    case ErrorCode::CompositionCycle: return "CompositionCycle";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::EmptyIntervention: return "EmptyIntervention";
    case ErrorCode::EvidenceInterventionOverlap: return "EvidenceInterventionOverlap";
    case ErrorCode::InvalidAdjustmentSet: return "InvalidAdjustmentSet";
    case ErrorCode::BackdoorOpen: return "BackdoorOpen";
    case ErrorCode::PositivityViolation: return "PositivityViolation";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

constexpr std::array<Role, kRoleCount> kRoles = {
    Role::Condition,   Role::Symptom,   Role::Sign,         Role::MedicalTest,
    Role::RiskFactor,  Role::PathogenicMechanism,           Role::Treatment,
    Role::Comorbidity, Role::Complication, Role::Reliability, Role::Synthetic,
    Role::Unclassified,
};

constexpr std::array<std::string_view, kRoleCount> kRoleNames = {
    "condition",   "symptom",      "sign",        "medical_test", "risk_factor", "pathogenic_mechanism",
    "treatment",   "comorbidity",  "complication", "reliability", "synthetic",   "unclassified",
};

}  // namespace

std::string_view role_name(Role role) { return kRoleNames[static_cast<std::size_t>(role)]; }

std::optional<Role> parse_role(std::string_view name) {
  for (std::size_t i = 0; i < kRoleCount; ++i)
    if (kRoleNames[i] == name) return kRoles[i];
  return std::nullopt;
}

std::span<const Role> all_roles() { return kRoles; }

bool is_manifestation(Role role) {
  return role == Role::Symptom || role == Role::Sign || role == Role::MedicalTest;
}

bool is_condition_like(Role role) { return role == Role::Condition || role == Role::Comorbidity; }

std::optional<std::size_t> Variable::state_index(std::string_view label) const {
  auto it = std::find(states.begin(), states.end(), label);
  if (it == states.end()) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

std::string_view to_string(BuildErrorCode code) {
  switch (code) {
    case BuildErrorCode::EmptyName: return "EmptyName";
    case BuildErrorCode::DuplicateVariable: return "DuplicateVariable";
    case BuildErrorCode::InvalidStates: return "InvalidStates";
    case BuildErrorCode::UnknownVariable: return "UnknownVariable";
    case BuildErrorCode::SelfLoop: return "SelfLoop";
    case BuildErrorCode::DuplicateEdge: return "DuplicateEdge";
    case BuildErrorCode::DecisionArcTarget: return "DecisionArcTarget";
    case BuildErrorCode::CycleDetected: return "CycleDetected";
    case BuildErrorCode::MissingCpt: return "MissingCpt";
    case BuildErrorCode::DuplicateCpt: return "DuplicateCpt";
    case BuildErrorCode::CptMismatch: return "CptMismatch";
    case BuildErrorCode::RowCountMismatch: return "RowCountMismatch";
    case BuildErrorCode::InvalidProbability: return "InvalidProbability";
    case BuildErrorCode::RowNotNormalized: return "RowNotNormalized";
  }
  return "Unknown";
}

Dag Dag::without_outgoing(std::size_t node) const {
  Dag out = *this;
  for (std::size_t child : out.children[node]) {
    auto& ps = out.parents[child];
    ps.erase(std::remove(ps.begin(), ps.end(), node), ps.end());
  }
  out.children[node].clear();
  return out;
}

std::size_t BayesNet::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(name) + "'", {std::string(name)});
}

std::optional<std::size_t> BayesNet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool BayesNet::has_edge(std::string_view parent, std::string_view child) const {
  return std::any_of(edges_.begin(), edges_.end(),
                     [&](const Edge& e) { return e.parent == parent && e.child == child; });
}

bool BayesNet::is_decision_edge(std::string_view parent, std::string_view child) const {
  return std::any_of(edges_.begin(), edges_.end(),
                     [&](const Edge& e) { return e.parent == parent && e.child == child && e.decision; });
}

std::span<const double> BayesNet::row(std::size_t index, std::span<const std::size_t> parent_states) const {
  const auto& ps = dag_.parents[index];
  std::size_t r = 0;
  for (std::size_t k = 0; k < ps.size(); ++k) r = r * variables_[ps[k]].cardinality() + parent_states[k];
  const std::size_t card = variables_[index].cardinality();
  return std::span<const double>(cpts_[index].table).subspan(r * card, card);
}

std::vector<std::pair<std::size_t, std::size_t>> BayesNet::resolve(const Assignment& assignment) const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(assignment.size());
  for (const auto& [name, state] : assignment) {
    const std::size_t v = index_of(name);
    auto s = variables_[v].state_index(state);
    if (!s)
      throw Error(ErrorCode::UnknownState, "variable '" + name + "' has no state '" + state + "'", {name});
    out.emplace_back(v, *s);
  }
  return out;
}

const BayesNet& BuildResult::value() const& {
  if (!net_) {
    std::ostringstream msg;
    msg << "invalid network:";
    for (const auto& e : errors_) msg << "\n  " << to_string(e.code) << ": " << e.message;
    throw Error(ErrorCode::InvalidNetwork, msg.str());
  }
  return *net_;
}

BayesNet BuildResult::value() && {
  value();
  return std::move(*net_);
}

std::optional<std::vector<std::size_t>> find_cycle(const std::vector<std::vector<std::size_t>>& children) {
  const std::size_t n = children.size();
  enum class Mark { White, Grey, Black };
  std::vector<Mark> mark(n, Mark::White);
  std::vector<std::size_t> parent(n, n);
  for (std::size_t root = 0; root < n; ++root) {
    if (mark[root] != Mark::White) continue;
    // Iterative DFS: (node, next child position).
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    mark[root] = Mark::Grey;
    while (!stack.empty()) {
      auto& [node, pos] = stack.back();
      if (pos == children[node].size()) {
        mark[node] = Mark::Black;
        stack.pop_back();
        continue;
      }
      const std::size_t next = children[node][pos++];
      if (mark[next] == Mark::Grey) {
        std::vector<std::size_t> cycle;
        for (std::size_t k = stack.size(); k-- > 0;) {
          cycle.push_back(stack[k].first);
          if (stack[k].first == next) break;
        }
        std::reverse(cycle.begin(), cycle.end());
        return cycle;
      }
      if (mark[next] == Mark::White) {
        mark[next] = Mark::Grey;
        stack.emplace_back(next, 0);
      }
    }
  }
  return std::nullopt;
}

struct NetworkBuilder {
  static BuildResult build(std::vector<Variable> variables, std::vector<Edge> edges, std::vector<Cpt> cpts) {
    std::vector<BuildError> errors;
    BayesNet net;

    for (std::size_t i = 0; i < variables.size(); ++i) {
      const auto& v = variables[i];
      if (v.name.empty()) {
        errors.push_back({BuildErrorCode::EmptyName, "variable with empty name", {}});
        continue;
      }
      if (!net.index_.emplace(v.name, i).second)
        errors.push_back({BuildErrorCode::DuplicateVariable, "duplicate variable '" + v.name + "'", {v.name}});
      std::set<std::string> distinct(v.states.begin(), v.states.end());
      if (v.states.size() < 2 || distinct.size() != v.states.size() || distinct.count(""))
        errors.push_back({BuildErrorCode::InvalidStates,
                          "variable '" + v.name + "' needs at least two distinct non-empty states",
                          {v.name}});
    }

    const std::size_t n = variables.size();
    net.dag_.parents.assign(n, {});
    net.dag_.children.assign(n, {});
    std::set<std::pair<std::size_t, std::size_t>> seen;
    std::vector<Edge> kept;
    for (const auto& e : edges) {
      auto p = net.find(e.parent);
      auto c = net.find(e.child);
      bool bad = false;
      for (const auto* name : {&e.parent, &e.child}) {
        if (!net.find(*name)) {
          errors.push_back({BuildErrorCode::UnknownVariable,
                            "edge " + e.parent + " -> " + e.child + " references unknown variable '" + *name + "'",
                            {*name}});
          bad = true;
        }
      }
      if (bad) continue;
      if (*p == *c) {
        errors.push_back({BuildErrorCode::SelfLoop, "self-loop on '" + e.parent + "'", {e.parent}});
        continue;
      }
      if (!seen.emplace(*p, *c).second) {
        errors.push_back(
            {BuildErrorCode::DuplicateEdge, "duplicate edge " + e.parent + " -> " + e.child, {e.parent, e.child}});
        continue;
      }
      if (e.decision && variables[*c].role != Role::Treatment)
        errors.push_back({BuildErrorCode::DecisionArcTarget,
                          "decision arc " + e.parent + " => " + e.child + " must point into a treatment node",
                          {e.parent, e.child}});
      net.dag_.children[*p].push_back(*c);
      kept.push_back(e);
    }

    if (auto cycle = find_cycle(net.dag_.children)) {
      std::vector<std::string> names;
      std::string msg = "cycle detected: ";
      for (std::size_t k : *cycle) {
        names.push_back(variables[k].name);
        msg += variables[k].name + " -> ";
      }
      msg += variables[cycle->front()].name;
      errors.push_back({BuildErrorCode::CycleDetected, msg, names});
    }

    // In-edge parent sets, for matching against CPT declarations.
    std::vector<std::set<std::size_t>> in_edges(n);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t c : net.dag_.children[p]) in_edges[c].insert(p);

    std::vector<std::optional<Cpt>> by_child(n);
    for (auto& cpt : cpts) {
      auto c = net.find(cpt.child);
      if (!c) {
        errors.push_back(
            {BuildErrorCode::UnknownVariable, "CPT for unknown variable '" + cpt.child + "'", {cpt.child}});
        continue;
      }
      if (by_child[*c]) {
        errors.push_back({BuildErrorCode::DuplicateCpt, "duplicate CPT for '" + cpt.child + "'", {cpt.child}});
        continue;
      }
      by_child[*c] = std::move(cpt);
    }

    for (std::size_t c = 0; c < n; ++c) {
      if (variables[c].name.empty()) continue;
      const auto& child = variables[c];
      if (!by_child[c]) {
        errors.push_back({BuildErrorCode::MissingCpt, "missing CPT for '" + child.name + "'", {child.name}});
        continue;
      }
      const Cpt& cpt = *by_child[c];
      std::set<std::size_t> declared;
      std::vector<std::size_t> order;
      bool unknown = false;
      for (const auto& pname : cpt.parents) {
        auto p = net.find(pname);
        if (!p) {
          errors.push_back({BuildErrorCode::UnknownVariable,
                            "CPT for '" + child.name + "' lists unknown parent '" + pname + "'",
                            {child.name, pname}});
          unknown = true;
          continue;
        }
        declared.insert(*p);
        order.push_back(*p);
      }
      if (unknown) continue;
      if (declared != in_edges[c] || order.size() != declared.size()) {
        std::string msg = "CPT parents of '" + child.name + "' do not match its in-edges (CPT: ";
        for (std::size_t k = 0; k < cpt.parents.size(); ++k) msg += (k ? ", " : "") + cpt.parents[k];
        msg += "; edges: ";
        bool first = true;
        for (std::size_t p : in_edges[c]) {
          msg += (first ? "" : ", ") + variables[p].name;
          first = false;
        }
        msg += ")";
        errors.push_back({BuildErrorCode::CptMismatch, msg, {child.name}});
        continue;
      }
      net.dag_.parents[c] = order;

      std::size_t rows = 1;
      for (std::size_t p : order) rows *= variables[p].cardinality();
      const std::size_t card = child.cardinality();
      if (card == 0 || cpt.table.size() != rows * card) {
        errors.push_back({BuildErrorCode::RowCountMismatch,
                          "CPT for '" + child.name + "' has " + std::to_string(cpt.table.size()) +
                              " entries, expected " + std::to_string(rows * card),
                          {child.name}});
        continue;
      }
      for (std::size_t r = 0; r < rows; ++r) {
        double sum = 0.0;
        bool valid = true;
        for (std::size_t s = 0; s < card; ++s) {
          const double q = cpt.table[r * card + s];
          if (!std::isfinite(q) || q < 0.0 || q > 1.0) valid = false;
          sum += q;
        }
        if (!valid) {
          errors.push_back({BuildErrorCode::InvalidProbability,
                            "CPT for '" + child.name + "' row " + std::to_string(r) + " has an entry outside [0,1]",
                            {child.name},
                            r});
        } else if (std::abs(sum - 1.0) > kProbabilityTolerance) {
          std::ostringstream msg;
          msg << "CPT for '" << child.name << "' row " << r << " sums to " << sum;
          errors.push_back({BuildErrorCode::RowNotNormalized, msg.str(), {child.name}, r, sum});
        }
      }
    }

    if (!errors.empty()) return BuildResult(std::move(errors));

    // Children in edge declaration order; CPTs indexed by variable.
    net.variables_ = std::move(variables);
    net.edges_ = std::move(kept);
    net.cpts_.reserve(n);
    for (std::size_t c = 0; c < n; ++c) net.cpts_.push_back(std::move(*by_child[c]));
    return BuildResult(std::move(net));
  }
};

BuildResult build_network(std::vector<Variable> variables, std::vector<Edge> edges, std::vector<Cpt> cpts) {
  return NetworkBuilder::build(std::move(variables), std::move(edges), std::move(cpts));
}

std::vector<std::size_t> topological_indices(const Dag& dag) {
  const std::size_t n = dag.size();
  std::vector<std::size_t> indegree(n);
  for (std::size_t v = 0; v < n; ++v) indegree[v] = dag.parents[v].size();
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (std::size_t c : dag.children[v])
      if (--indegree[c] == 0) ready.push(c);
  }
  return order;
}

std::vector<std::string> topological_order(const BayesNet& net) {
  std::vector<std::string> out;
  for (std::size_t v : topological_indices(net.dag())) out.push_back(net.variable(v).name);
  return out;
}

bool d_separated(const Dag& dag, const std::vector<std::size_t>& x, const std::vector<std::size_t>& y,
                 const std::vector<std::size_t>& z) {
  const std::size_t n = dag.size();
  std::vector<bool> in_z(n), in_y(n);
  for (std::size_t v : z) in_z[v] = true;
  for (std::size_t v : y) in_y[v] = true;
  // Converging nodes are opened by Z or any of their descendants in Z.
  const std::vector<bool> z_ancestry = [&] {
    auto mask = ancestor_mask(dag, z);
    for (std::size_t v : z) mask[v] = true;
    return mask;
  }();

  // Reachability over (node, arrived-from-child) states.
  std::vector<std::array<bool, 2>> visited(n, {false, false});
  std::deque<std::pair<std::size_t, bool>> frontier;
  for (std::size_t v : x) frontier.emplace_back(v, true);
  while (!frontier.empty()) {
    auto [v, from_child] = frontier.front();
    frontier.pop_front();
    if (visited[v][from_child]) continue;
    visited[v][from_child] = true;
    if (!in_z[v] && in_y[v]) return false;
    if (from_child) {
      if (in_z[v]) continue;
      for (std::size_t p : dag.parents[v]) frontier.emplace_back(p, true);
      for (std::size_t c : dag.children[v]) frontier.emplace_back(c, false);
    } else {
      if (!in_z[v])
        for (std::size_t c : dag.children[v]) frontier.emplace_back(c, false);
      if (z_ancestry[v])
        for (std::size_t p : dag.parents[v]) frontier.emplace_back(p, true);
    }
  }
  return true;
}

namespace {

std::vector<std::size_t> indices_of(const BayesNet& net, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& name : names) out.push_back(net.index_of(name));
  return out;
}

}  // namespace

bool d_separated(const BayesNet& net, const std::vector<std::string>& x, const std::vector<std::string>& y,
                 const std::vector<std::string>& z) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::EmptyQuerySet, "d-separation query sets X and Y must be non-empty");
  const auto xi = indices_of(net, x), yi = indices_of(net, y), zi = indices_of(net, z);
  std::vector<int> owner(net.size(), -1);
  std::vector<std::string> overlap;
  int set_id = 0;
  for (const auto* set : {&xi, &yi, &zi}) {
    for (std::size_t v : *set) {
      if (owner[v] != -1 && owner[v] != set_id) overlap.push_back(net.variable(v).name);
      owner[v] = set_id;
    }
    ++set_id;
  }
  if (!overlap.empty())
    throw Error(ErrorCode::OverlappingSets, "d-separation query sets must be pairwise disjoint", overlap);
  return d_separated(net.dag(), xi, yi, zi);
}

std::vector<bool> descendant_mask(const Dag& dag, std::span<const std::size_t> roots) {
  std::vector<bool> mask(dag.size());
  std::vector<std::size_t> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t c : dag.children[v])
      if (!mask[c]) {
        mask[c] = true;
        stack.push_back(c);
      }
  }
  return mask;
}

std::vector<bool> ancestor_mask(const Dag& dag, std::span<const std::size_t> roots) {
  std::vector<bool> mask(dag.size());
  std::vector<std::size_t> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t p : dag.parents[v])
      if (!mask[p]) {
        mask[p] = true;
        stack.push_back(p);
      }
  }
  return mask;
}

namespace {

std::vector<std::string> names_in(const BayesNet& net, const std::vector<bool>& mask, std::size_t self) {
  std::vector<std::string> out;
  for (std::size_t v = 0; v < mask.size(); ++v)
    if (mask[v] && v != self) out.push_back(net.variable(v).name);
  return out;
}

}  // namespace

std::vector<std::string> descendants(const BayesNet& net, std::string_view name) {
  const std::size_t v = net.index_of(name);
  const std::size_t roots[] = {v};
  return names_in(net, descendant_mask(net.dag(), roots), v);
}

std::vector<std::string> ancestors(const BayesNet& net, std::string_view name) {
  const std::size_t v = net.index_of(name);
  const std::size_t roots[] = {v};
  return names_in(net, ancestor_mask(net.dag(), roots), v);
}

double joint_probability(const BayesNet& net, std::span<const std::size_t> states) {
  if (states.size() != net.size())
    throw Error(ErrorCode::IncompleteAssignment, "joint probability needs a state for every variable");
  double p = 1.0;
  std::vector<std::size_t> parent_states;
  for (std::size_t v = 0; v < net.size(); ++v) {
    parent_states.clear();
    for (std::size_t q : net.parents(v)) parent_states.push_back(states[q]);
    p *= net.row(v, parent_states)[states[v]];
  }
  return p;
}

double joint_probability(const BayesNet& net, const Assignment& full_assignment) {
  std::vector<std::size_t> states(net.size(), 0);
  std::vector<bool> covered(net.size());
  for (auto [v, s] : net.resolve(full_assignment)) {
    states[v] = s;
    covered[v] = true;
  }
  std::vector<std::string> missing;
  for (std::size_t v = 0; v < net.size(); ++v)
    if (!covered[v]) missing.push_back(net.variable(v).name);
  if (!missing.empty())
    throw Error(ErrorCode::IncompleteAssignment, "assignment does not cover every variable", missing);
  return joint_probability(net, states);
}

}  // namespace idiombn
