#include "idiombn/causal.hpp"

#include <algorithm>

namespace idiombn {

std::string_view to_string(QueryMode mode) {
  switch (mode) {
    case QueryMode::Observational: return "observational";
    case QueryMode::Interventional: return "interventional";
    case QueryMode::Counterfactual: return "counterfactual";
  }
  return "unknown";
}

namespace {

std::vector<double> point_mass(std::size_t cardinality, std::size_t state) {
  std::vector<double> table(cardinality, 0.0);
  table[state] = 1.0;
  return table;
}

std::vector<Edge> removed_by_surgery(const BayesNet& net, const Intervention& intervention) {
  std::vector<Edge> removed;
  for (const auto& e : net.edges())
    if (intervention.count(e.child)) removed.push_back(e);
  return removed;
}

}  // namespace

BayesNet do_surgery(const BayesNet& net, const Intervention& intervention) {
  if (intervention.empty()) throw Error(ErrorCode::EmptyIntervention, "intervention names no variables");
  const auto forced = net.resolve(intervention);

  std::vector<Edge> edges;
  for (const auto& e : net.edges())
    if (!intervention.count(e.child)) edges.push_back(e);
  std::vector<Cpt> cpts = net.cpts();
  for (auto [v, s] : forced) {
    cpts[v].parents.clear();
    cpts[v].table = point_mass(net.variable(v).cardinality(), s);
  }
  return build_network(net.variables(), std::move(edges), std::move(cpts)).value();
}

CausalQueryResult interventional_query(const BayesNet& net, std::string_view target,
                                       const Intervention& intervention, const Evidence& evidence) {
  std::vector<std::string> overlap;
  for (const auto& [name, state] : evidence)
    if (intervention.count(name)) overlap.push_back(name);
  if (!overlap.empty())
    throw Error(ErrorCode::EvidenceInterventionOverlap, "a variable cannot be both observed and intervened upon",
                overlap);

  const BayesNet mutilated = do_surgery(net, intervention);
  Evidence combined = evidence;
  combined.insert(intervention.begin(), intervention.end());

  CausalQueryResult result{posterior(mutilated, target, combined), QueryMode::Interventional, {}, {}, {}};
  result.removed_edges = removed_by_surgery(net, intervention);
  return result;
}

bool backdoor_blocked(const BayesNet& net, std::string_view treatment, std::string_view target,
                      const std::vector<std::string>& adjustment) {
  const std::size_t t = net.index_of(treatment);
  const std::size_t y = net.index_of(target);
  if (t == y)
    throw Error(ErrorCode::InvalidAdjustmentSet, "treatment and target must differ", {std::string(treatment)});
  const std::size_t roots[] = {t};
  const auto downstream = descendant_mask(net.dag(), roots);
  std::vector<std::size_t> z;
  std::vector<std::string> invalid;
  for (const auto& name : adjustment) {
    const std::size_t v = net.index_of(name);
    if (v == t || v == y || downstream[v]) invalid.push_back(name);
    z.push_back(v);
  }
  if (!invalid.empty())
    throw Error(ErrorCode::InvalidAdjustmentSet,
                "adjustment set may not contain the treatment, the target or descendants of the treatment", invalid);
  return d_separated(net.dag().without_outgoing(t), {t}, {y}, z);
}

Distribution backdoor_adjust(const BayesNet& net, std::string_view target, std::string_view treatment,
                             std::string_view forced_state, const std::vector<std::string>& adjustment) {
  if (!backdoor_blocked(net, treatment, target, adjustment)) {
    std::vector<std::string> names{std::string(treatment), std::string(target)};
    throw Error(ErrorCode::BackdoorOpen, "adjustment set leaves a backdoor path open between '" +
                                             std::string(treatment) + "' and '" + std::string(target) + "'",
                names);
  }
  const std::size_t tv = net.index_of(treatment);
  if (!net.variable(tv).state_index(forced_state))
    throw Error(ErrorCode::UnknownState,
                "variable '" + std::string(treatment) + "' has no state '" + std::string(forced_state) + "'",
                {std::string(treatment)});

  const Variable& out_var = net.variable(target);
  std::vector<double> acc(out_var.cardinality(), 0.0);
  std::vector<std::size_t> z;
  for (const auto& name : adjustment) z.push_back(net.index_of(name));
  std::vector<std::size_t> states(z.size(), 0);
  for (;;) {
    Evidence stratum;
    for (std::size_t k = 0; k < z.size(); ++k) stratum[net.variable(z[k]).name] = net.variable(z[k]).states[states[k]];
    const double weight = evidence_probability(net, stratum);
    if (weight >= kImpossibleEvidenceThreshold) {
      Evidence conditioned = stratum;
      conditioned[std::string(treatment)] = std::string(forced_state);
      if (evidence_probability(net, conditioned) < kImpossibleEvidenceThreshold)
        throw Error(ErrorCode::PositivityViolation,
                    "treatment state '" + std::string(forced_state) +
                        "' has probability zero in a stratum of the adjustment set",
                    adjustment);
      const Distribution d = posterior(net, target, conditioned);
      for (std::size_t s = 0; s < acc.size(); ++s) acc[s] += d.probabilities[s] * weight;
    }
    std::size_t k = z.size();
    while (k-- > 0) {
      if (++states[k] < net.variable(z[k]).cardinality()) break;
      states[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return Distribution{out_var.name, out_var.states, std::move(acc)};
}

const std::string& TwinNetwork::hypothetical_name(const std::string& name) const {
  auto it = hypothetical.find(name);
  if (it != hypothetical.end()) return it->second;
  if (std::find(shared.begin(), shared.end(), name) != shared.end()) return name;
  throw Error(ErrorCode::UnknownVariable, "unknown variable '" + name + "'", {name});
}

TwinNetwork build_twin(const BayesNet& net, const Intervention& intervention, bool counterfactual_treatment_mode) {
  if (intervention.empty()) throw Error(ErrorCode::EmptyIntervention, "intervention names no variables");
  const auto forced = net.resolve(intervention);
  const std::size_t n = net.size();

  std::vector<bool> is_target(n, false);
  std::vector<std::size_t> roots;
  for (auto [v, s] : forced) {
    is_target[v] = true;
    roots.push_back(v);
  }
  std::vector<bool> duplicated = descendant_mask(net.dag(), roots);
  for (std::size_t v : roots) duplicated[v] = true;

  TwinNetwork twin;
  twin.intervention = intervention;
  auto copy_name = [&](std::size_t v) { return net.variable(v).name + std::string(kHypotheticalSuffix); };
  auto world_name = [&](std::size_t v) { return duplicated[v] ? copy_name(v) : net.variable(v).name; };

  // Each hypothetical copy directly follows its actual node so that
  // declaration-order tie-breaks match those of the original network.
  std::vector<Variable> variables;
  for (std::size_t v = 0; v < n; ++v) {
    variables.push_back(net.variable(v));
    if (duplicated[v]) {
      const std::string copy = copy_name(v);
      if (net.contains(copy))
        throw Error(ErrorCode::InvalidNetwork, "twin copy name '" + copy + "' collides with an existing variable",
                    {copy});
      Variable hv = net.variable(v);
      hv.name = copy;
      variables.push_back(std::move(hv));
      twin.hypothetical.emplace(net.variable(v).name, copy);
    } else {
      twin.shared.push_back(net.variable(v).name);
    }
  }

  auto strips_decision = [&](const Edge& e) {
    if (!counterfactual_treatment_mode || !e.decision) return false;
    const std::size_t c = net.index_of(e.child);
    return is_target[c] && net.variable(c).role == Role::Treatment;
  };

  std::vector<Edge> edges;
  for (const auto& e : net.edges()) {
    if (strips_decision(e))
      twin.removed_actual_edges.push_back(e);
    else
      edges.push_back(e);
  }
  for (const auto& e : net.edges()) {
    const std::size_t p = net.index_of(e.parent), c = net.index_of(e.child);
    if (!duplicated[c] || is_target[c]) continue;
    edges.push_back(Edge{world_name(p), copy_name(c), e.decision});
  }

  std::vector<Cpt> cpts;
  for (std::size_t v = 0; v < n; ++v) {
    const Cpt& original = net.cpt(v);
    const bool stripped = std::any_of(twin.removed_actual_edges.begin(), twin.removed_actual_edges.end(),
                                      [&](const Edge& e) { return e.child == original.child; });
    if (!stripped) {
      cpts.push_back(original);
    } else {
      // Decision parents are marginalized out: each remaining row is the
      // original network's P(T | remaining parents).
      Cpt actual{original.child, {}, {}};
      std::vector<std::size_t> remaining;
      for (std::size_t p : net.parents(v)) {
        const auto& pname = net.variable(p).name;
        if (!net.is_decision_edge(pname, original.child)) {
          actual.parents.push_back(pname);
          remaining.push_back(p);
        }
      }
      const std::size_t card = net.variable(v).cardinality();
      std::vector<std::size_t> states(remaining.size(), 0);
      for (;;) {
        Evidence row_evidence;
        for (std::size_t k = 0; k < remaining.size(); ++k)
          row_evidence[net.variable(remaining[k]).name] = net.variable(remaining[k]).states[states[k]];
        std::vector<double> row(card, 1.0 / static_cast<double>(card));
        if (evidence_probability(net, row_evidence) >= kImpossibleEvidenceThreshold)
          row = posterior(net, original.child, row_evidence).probabilities;
        actual.table.insert(actual.table.end(), row.begin(), row.end());
        std::size_t k = remaining.size();
        while (k-- > 0) {
          if (++states[k] < net.variable(remaining[k]).cardinality()) break;
          states[k] = 0;
        }
        if (k == static_cast<std::size_t>(-1)) break;
      }
      cpts.push_back(std::move(actual));
    }
    if (!duplicated[v]) continue;
    Cpt copy{copy_name(v), {}, {}};
    if (is_target[v]) {
      const auto forced_state = std::find_if(forced.begin(), forced.end(), [&](auto f) { return f.first == v; });
      copy.table = point_mass(net.variable(v).cardinality(), forced_state->second);
    } else {
      for (std::size_t p : net.parents(v)) copy.parents.push_back(world_name(p));
      copy.table = original.table;
    }
    cpts.push_back(std::move(copy));
  }

  twin.net = build_network(std::move(variables), std::move(edges), std::move(cpts)).value();
  return twin;
}

namespace {

// Accepts either `X` or its hypothetical spelling `X'` for an original X.
std::string actual_name(const BayesNet& net, std::string_view name) {
  if (!net.contains(name) && name.size() > kHypotheticalSuffix.size() && name.ends_with(kHypotheticalSuffix)) {
    const auto base = name.substr(0, name.size() - kHypotheticalSuffix.size());
    if (net.contains(base)) return std::string(base);
  }
  return std::string(name);
}

}  // namespace

CausalQueryResult counterfactual_query(const BayesNet& net, const Evidence& actual_evidence,
                                       const Intervention& hypothetical_intervention, std::string_view hypothetical_target) {
  Intervention intervention;
  for (const auto& [name, state] : hypothetical_intervention) intervention[actual_name(net, name)] = state;
  const std::string target = actual_name(net, hypothetical_target);
  bool treatment_mode = false;
  for (auto [v, s] : net.resolve(intervention))
    if (net.variable(v).role == Role::Treatment) treatment_mode = true;
  net.resolve(actual_evidence);
  net.index_of(target);

  const TwinNetwork twin = build_twin(net, intervention, treatment_mode);
  Evidence evidence = actual_evidence;
  for (const auto& [name, state] : intervention) evidence[twin.hypothetical.at(name)] = state;

  const std::string query = twin.hypothetical_name(target);
  Distribution d = posterior(twin.net, query, evidence);

  CausalQueryResult result{std::move(d), QueryMode::Counterfactual, twin.removed_actual_edges, {}, {}};
  for (const auto& e : removed_by_surgery(net, intervention)) result.removed_edges.push_back(e);
  result.notes.push_back(
      "twin network shares only non-descendants of the intervened variables; actual-world evidence on their "
      "descendants reaches the hypothetical world solely through those shared variables (no exogenous noise model)");
  if (treatment_mode)
    result.notes.push_back("decision arcs into the intervened treatment were removed in the actual world as well");
  return result;
}

}  // namespace idiombn
