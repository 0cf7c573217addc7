#include "idiombn/idioms.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace idiombn {

namespace {

constexpr std::array<std::string_view, kTemplateCount> kTemplateNames = {
    "manifestation",
    "manifestation_reliability",
    "risk_factor",
    "pathogenesis",
    "comorbidity_common_cause",
    "comorbidity_common_symptomology",
    "complication",
    "treatment",
    "treatment_reliability",
    "counterfactual_treatment",
    "cause_consequence",
    "measurement",
    "definition_synthesis",
    "induction",
};

using R = Role;

const std::vector<Role> kConditionLike = {R::Condition, R::Comorbidity};
const std::vector<Role> kManifestations = {R::Symptom, R::Sign, R::MedicalTest};

Slot one(std::string name, std::vector<Role> roles) { return Slot{std::move(name), Arity::One, false, std::move(roles)}; }
Slot many(std::string name, std::vector<Role> roles) {
  return Slot{std::move(name), Arity::Many, false, std::move(roles)};
}
Slot optional_many(std::string name, std::vector<Role> roles) {
  return Slot{std::move(name), Arity::Many, true, std::move(roles)};
}
Slot optional_one(std::string name, std::vector<Role> roles) {
  return Slot{std::move(name), Arity::One, true, std::move(roles)};
}

std::vector<EdgeSchema> treatment_edges() {
  return {{"condition", "treatment", true}, {"treatment", "outcome", false}, {"condition", "outcome", false}};
}

std::vector<Slot> treatment_slots() {
  return {one("condition", kConditionLike), one("treatment", {R::Treatment}), one("outcome", {R::Complication})};
}

std::vector<IdiomTemplate> make_catalog() {
  std::vector<IdiomTemplate> c;
  c.push_back({TemplateId::Manifestation,
               {one("condition", kConditionLike), many("manifestations", kManifestations)},
               {{"condition", "manifestations", false}}});
  c.push_back({TemplateId::ManifestationReliability,
               {one("condition", kConditionLike), one("actual", kManifestations), one("reported", kManifestations),
                one("reliability", {R::Reliability}),
                optional_many("factors", {R::Reliability, R::Synthetic, R::Unclassified})},
               {{"condition", "actual", false},
                {"actual", "reported", false},
                {"reliability", "reported", false},
                {"factors", "reliability", false}}});
  c.push_back({TemplateId::RiskFactor,
               {many("risk_factors", {R::RiskFactor, R::Comorbidity, R::Condition}),
                many("affected", {R::Condition, R::Comorbidity, R::PathogenicMechanism, R::Symptom, R::Sign,
                                  R::MedicalTest, R::Treatment})},
               {{"risk_factors", "affected", false}}});
  c.push_back({TemplateId::Pathogenesis,
               {many("risk_factors", {R::RiskFactor}), one("mechanism", {R::PathogenicMechanism}),
                one("condition", kConditionLike)},
               {{"risk_factors", "mechanism", false}, {"mechanism", "condition", false}}});
  c.push_back({TemplateId::ComorbidityCommonCause,
               {one("cause", {R::RiskFactor, R::PathogenicMechanism, R::Condition, R::Comorbidity}),
                one("condition", {R::Condition, R::Comorbidity, R::PathogenicMechanism}),
                one("comorbidity", {R::Comorbidity})},
               {{"cause", "condition", false}, {"cause", "comorbidity", false}}});
  c.push_back({TemplateId::ComorbidityCommonSymptomology,
               {one("condition", {R::Condition, R::Comorbidity, R::PathogenicMechanism}),
                one("comorbidity", {R::Comorbidity}),
                many("consequences", {R::Symptom, R::Sign, R::MedicalTest, R::Complication})},
               {{"condition", "consequences", false}, {"comorbidity", "consequences", false}}});
  c.push_back({TemplateId::Complication,
               {one("cause", {R::Condition, R::Comorbidity, R::Treatment}), one("complication", {R::Complication})},
               {{"cause", "complication", false}}});
  c.push_back({TemplateId::Treatment, treatment_slots(), treatment_edges()});
  {
    auto slots = treatment_slots();
    slots.push_back(one("reliability", {R::Reliability}));
    auto edges = treatment_edges();
    edges.push_back({"reliability", "outcome", false});
    c.push_back({TemplateId::TreatmentReliability, std::move(slots), std::move(edges)});
  }
  c.push_back({TemplateId::CounterfactualTreatment, treatment_slots(), treatment_edges(), false, true});
  c.push_back({TemplateId::CauseConsequence,
               {one("cause", {R::Unclassified, R::RiskFactor, R::PathogenicMechanism, R::Condition, R::Comorbidity,
                              R::Treatment, R::Synthetic}),
                one("consequence", {R::Unclassified, R::Condition, R::Comorbidity, R::PathogenicMechanism,
                                    R::Symptom, R::Sign, R::MedicalTest, R::Synthetic})},
               {{"cause", "consequence", false}},
               true});
  c.push_back({TemplateId::Measurement,
               {one("actual", {R::Unclassified, R::Condition, R::Comorbidity, R::PathogenicMechanism, R::Symptom,
                               R::Sign, R::RiskFactor, R::Treatment, R::Synthetic}),
                one("assessed", {R::Unclassified, R::Symptom, R::Sign, R::MedicalTest, R::Synthetic}),
                optional_one("accuracy", {R::Reliability, R::Unclassified})},
               {{"actual", "assessed", false}, {"accuracy", "assessed", false}},
               true});
  c.push_back({TemplateId::DefinitionSynthesis,
               {many("parts", {R::Unclassified, R::Condition, R::Symptom, R::Sign, R::MedicalTest, R::RiskFactor,
                               R::PathogenicMechanism, R::Treatment, R::Comorbidity, R::Reliability,
                               R::Synthetic}),
                one("synthetic", {R::Synthetic, R::Reliability})},
               {{"parts", "synthetic", false}},
               true});
  c.push_back({TemplateId::Induction,
               {one("parameter", {R::Unclassified, R::Synthetic}),
                many("observations", {R::Unclassified, R::Synthetic, R::Symptom, R::Sign, R::MedicalTest})},
               {{"parameter", "observations", false}},
               true});
  return c;
}

std::string join_roles(const std::vector<Role>& roles) {
  std::string out;
  for (std::size_t i = 0; i < roles.size(); ++i) out += (i ? ", " : "") + std::string(role_name(roles[i]));
  return out;
}

void sort_fragment(Fragment& f) {
  std::sort(f.variables.begin(), f.variables.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  std::sort(f.edges.begin(), f.edges.end(), [](const auto& a, const auto& b) {
    return std::tie(a.parent, a.child) < std::tie(b.parent, b.child);
  });
}

}  // namespace

std::string_view template_name(TemplateId id) { return kTemplateNames[static_cast<std::size_t>(id)]; }

std::optional<TemplateId> parse_template(std::string_view name) {
  for (std::size_t i = 0; i < kTemplateCount; ++i)
    if (kTemplateNames[i] == name) return static_cast<TemplateId>(i);
  return std::nullopt;
}

bool Slot::allows(Role role) const {
  return std::find(allowed_roles.begin(), allowed_roles.end(), role) != allowed_roles.end();
}

const Slot* IdiomTemplate::slot(std::string_view name) const {
  for (const auto& s : slots)
    if (s.name == name) return &s;
  return nullptr;
}

const FragmentVariable* Fragment::variable(std::string_view name) const {
  for (const auto& v : variables)
    if (v.name == name) return &v;
  return nullptr;
}

bool Fragment::has_edge(std::string_view parent, std::string_view child) const {
  return std::any_of(edges.begin(), edges.end(),
                     [&](const auto& e) { return e.parent == parent && e.child == child; });
}

const std::vector<IdiomTemplate>& catalog() {
  static const std::vector<IdiomTemplate> templates = make_catalog();
  return templates;
}

const IdiomTemplate& find_template(TemplateId id) { return catalog()[static_cast<std::size_t>(id)]; }

Fragment instantiate(TemplateId id, const Bindings& bindings, const RoleLookup* roles, const std::string& label) {
  const IdiomTemplate& tpl = find_template(id);
  const std::string where = label.empty() ? std::string(template_name(id)) : label;

  for (const auto& [slot_name, names] : bindings)
    if (!tpl.slot(slot_name))
      throw Error(ErrorCode::UnknownSlot,
                  "template '" + std::string(template_name(id)) + "' has no slot '" + slot_name + "'");

  Fragment f;
  std::set<std::string> bound;
  for (const auto& slot : tpl.slots) {
    auto it = bindings.find(slot.name);
    if (it == bindings.end()) {
      if (slot.optional) continue;
      throw Error(ErrorCode::MissingSlot,
                  where + ": slot '" + slot.name + "' of template '" + std::string(template_name(id)) + "' is unbound");
    }
    const auto& names = it->second;
    if (names.empty() && !slot.optional)
      throw Error(ErrorCode::ArityViolation, where + ": slot '" + slot.name + "' needs at least one variable");
    if (slot.arity == Arity::One && names.size() > 1)
      throw Error(ErrorCode::ArityViolation, where + ": slot '" + slot.name + "' takes exactly one variable", names);
    for (const auto& name : names) {
      if (!bound.insert(name).second)
        throw Error(ErrorCode::DuplicateBinding, where + ": variable '" + name + "' is bound more than once", {name});
      Role role = slot.allowed_roles.front();
      if (roles) {
        if (auto r = roles->find(name); r != roles->end()) {
          role = r->second;
          if (!slot.allows(role))
            f.warnings.push_back(where + ": '" + name + "' has role " + std::string(role_name(role)) + " but slot '" +
                                 slot.name + "' expects " + join_roles(slot.allowed_roles));
        }
      }
      f.variables.push_back({name, {role}});
    }
  }

  for (const auto& schema : tpl.edges) {
    auto from = bindings.find(schema.from_slot);
    auto to = bindings.find(schema.to_slot);
    if (from == bindings.end() || to == bindings.end()) continue;
    for (const auto& p : from->second)
      for (const auto& c : to->second) f.edges.push_back({p, c, schema.decision, {where}});
  }
  if (id == TemplateId::Induction)
    f.warnings.push_back(where + ": induction idiom is structural only; its parameters are not quantified");
  sort_fragment(f);
  return f;
}

Fragment instantiate(const IdiomInstance& instance, const RoleLookup* roles) {
  return instantiate(instance.template_id, instance.bindings, roles, instance.label);
}

Fragment compose(const std::vector<Fragment>& fragments) {
  std::map<std::string, std::set<Role>> roles;
  std::map<std::string, std::vector<std::set<Role>>> contributions;
  std::map<std::pair<std::string, std::string>, FragmentEdge> edges;
  Fragment out;
  for (const auto& f : fragments) {
    out.warnings.insert(out.warnings.end(), f.warnings.begin(), f.warnings.end());
    for (const auto& v : f.variables) {
      roles[v.name].insert(v.roles.begin(), v.roles.end());
      contributions[v.name].emplace_back(v.roles.begin(), v.roles.end());
    }
    for (const auto& e : f.edges) {
      auto [it, fresh] = edges.try_emplace({e.parent, e.child}, e);
      if (fresh) continue;
      it->second.decision = it->second.decision || e.decision;
      std::set<std::string> sources(it->second.sources.begin(), it->second.sources.end());
      sources.insert(e.sources.begin(), e.sources.end());
      it->second.sources.assign(sources.begin(), sources.end());
    }
  }

  for (const auto& [name, set] : roles) {
    out.variables.push_back({name, std::vector<Role>(set.begin(), set.end())});
    const auto& parts = contributions[name];
    const bool disagree = std::any_of(parts.begin(), parts.end(), [&](const auto& s) { return s != parts.front(); });
    if (set.size() > 1 && disagree)
      out.warnings.push_back("variable '" + name + "' carries multiple roles: " + join_roles(out.variables.back().roles));
  }
  for (auto& [key, e] : edges) out.edges.push_back(std::move(e));

  std::map<std::string, std::size_t> index;
  for (const auto& v : out.variables) index.emplace(v.name, index.size());
  std::vector<std::vector<std::size_t>> children(out.variables.size());
  for (const auto& e : out.edges) children[index.at(e.parent)].push_back(index.at(e.child));
  if (auto cycle = find_cycle(children)) {
    std::vector<std::string> names;
    for (std::size_t k : *cycle) names.push_back(out.variables[k].name);
    std::string msg = "composition creates a cycle:";
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto& from = names[k];
      const auto& to = names[(k + 1) % names.size()];
      const auto& e = *std::find_if(out.edges.begin(), out.edges.end(),
                                    [&](const auto& x) { return x.parent == from && x.child == to; });
      msg += " " + from + " -> " + to + " (from ";
      for (std::size_t s = 0; s < e.sources.size(); ++s) msg += (s ? ", " : "") + e.sources[s];
      msg += ")";
    }
    throw Error(ErrorCode::CompositionCycle, msg, names);
  }
  return out;
}

std::vector<TemplateId> suggest_idiom(const std::vector<std::pair<std::string, Role>>& group,
                                      const SuggestionHints& hints) {
  if (group.empty()) throw Error(ErrorCode::EmptyGroup, "cannot suggest an idiom for an empty group");

  std::size_t conditions = 0, comorbidities = 0, mechanisms = 0;
  bool manifestation = false, risk_factor = false, treatment = false, complication = false, reliability = false,
       synthetic = false;
  for (const auto& [name, role] : group) {
    switch (role) {
      case Role::Condition: ++conditions; break;
      case Role::Comorbidity: ++comorbidities; break;
      case Role::PathogenicMechanism: ++mechanisms; break;
      case Role::Symptom:
      case Role::Sign:
      case Role::MedicalTest: manifestation = true; break;
      case Role::RiskFactor: risk_factor = true; break;
      case Role::Treatment: treatment = true; break;
      case Role::Complication: complication = true; break;
      case Role::Reliability: reliability = true; break;
      case Role::Synthetic: synthetic = true; break;
      case Role::Unclassified: break;
    }
  }
  const bool condition_like = conditions + comorbidities > 0;
  const bool comorbid_pair = comorbidities > 0 && conditions + comorbidities + mechanisms >= 2;
  const bool human_reported = hints.human_reported.value_or(false);
  const bool mediator_hidden = hints.mediator_observable.has_value() && !*hints.mediator_observable;

  // (template, specificity)
  std::vector<std::pair<TemplateId, int>> matches;
  if (condition_like && manifestation) {
    matches.emplace_back(TemplateId::Manifestation, 2);
    if (human_reported) matches.emplace_back(TemplateId::ManifestationReliability, 3);
  }
  if (risk_factor && condition_like) {
    matches.emplace_back(TemplateId::RiskFactor, 2);
    matches.emplace_back(TemplateId::Pathogenesis, mediator_hidden || mechanisms > 0 ? 3 : 1);
  }
  if (comorbid_pair && risk_factor) matches.emplace_back(TemplateId::ComorbidityCommonCause, 3);
  if (comorbid_pair && manifestation) matches.emplace_back(TemplateId::ComorbidityCommonSymptomology, 3);
  if ((condition_like || treatment) && complication && hints.temporal_late_effect.value_or(false))
    matches.emplace_back(TemplateId::Complication, 2);
  if (condition_like && treatment) {
    matches.emplace_back(TemplateId::Treatment, 2);
    if (human_reported) matches.emplace_back(TemplateId::TreatmentReliability, 3);
  }
  if (reliability) matches.emplace_back(TemplateId::Measurement, 1);
  if (synthetic) matches.emplace_back(TemplateId::DefinitionSynthesis, 1);

  std::stable_sort(matches.begin(), matches.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<TemplateId> ranked;
  for (const auto& [id, score] : matches)
    if (std::find(ranked.begin(), ranked.end(), id) == ranked.end()) ranked.push_back(id);
  ranked.push_back(TemplateId::CauseConsequence);
  return ranked;
}

}  // namespace idiombn
