#include "idiombn/linter.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace idiombn {

std::string rule_id(Rule rule) { return "R" + std::to_string(static_cast<int>(rule)); }

Severity rule_severity(Rule rule) {
  switch (rule) {
    case Rule::R1:
    case Rule::R2:
    case Rule::R5:
    case Rule::R6: return Severity::Error;
    default: return Severity::Warning;
  }
}

namespace {

// Labels read as "treatment withheld", in preference order.
const std::vector<std::string> kNotAppliedLabels = {"not_applied", "not_given", "no",       "none",
                                                    "absent",      "untreated", "not_taken"};

std::size_t not_applied_state(const Variable& v) {
  for (const auto& label : kNotAppliedLabels)
    if (auto s = v.state_index(label)) return *s;
  return v.cardinality() - 1;
}

class Linter {
 public:
  Linter(const BayesNet& net, const LintOptions& options) : net_(net), options_(options) {
    const auto order = topological_indices(net.dag());
    rank_.resize(net.size());
    for (std::size_t k = 0; k < order.size(); ++k) rank_[order[k]] = k;
  }

  void edge_rules() {
    for (const auto& e : net_.edges()) {
      const Role from = net_.variable(e.parent).role, to = net_.variable(e.child).role;
      if (is_manifestation(from) && is_condition_like(to))
        report(Rule::R1, {e.parent, e.child}, {e},
               "'" + e.parent + "' (" + std::string(role_name(from)) + ") points into '" + e.child + "' (" +
                   std::string(role_name(to)) + "); a manifestation is a consequence of the condition, not its cause",
               "manifestations are consequences");
      if ((is_condition_like(from) || from == Role::Complication) && to == Role::RiskFactor)
        report(Rule::R2, {e.parent, e.child}, {e},
               "'" + e.parent + "' (" + std::string(role_name(from)) + ") points into risk factor '" + e.child +
                   "'; a risk factor precedes the condition it affects",
               "risk factors are causes");
      if (from == Role::PathogenicMechanism && is_manifestation(to))
        report(Rule::R4, {e.parent, e.child}, {e},
               "pathogenic mechanism '" + e.parent + "' has manifestation child '" + e.child +
                   "'; mechanisms usually explain the condition, not its manifestations",
               "mechanisms explain conditions");
      if (from == Role::Reliability &&
          (is_condition_like(to) || to == Role::PathogenicMechanism || to == Role::RiskFactor))
        report(Rule::R6, {e.parent, e.child}, {e},
               "reliability node '" + e.parent + "' points into '" + e.child + "' (" + std::string(role_name(to)) +
                   "); reliability only qualifies reported observations",
               "reliability qualifies observations");
    }
  }

  void mediation_rule() {
    for (const auto& e : net_.edges()) {
      const std::size_t rf = net_.index_of(e.parent), c = net_.index_of(e.child);
      if (net_.variable(rf).role != Role::RiskFactor || net_.variable(c).role != Role::Condition) continue;
      const std::size_t from[] = {rf}, to[] = {c};
      const auto below = descendant_mask(net_.dag(), from);
      const auto above = ancestor_mask(net_.dag(), to);
      std::vector<std::string> mediators;
      for (std::size_t m = 0; m < net_.size(); ++m)
        if (net_.variable(m).role == Role::PathogenicMechanism && below[m] && above[m])
          mediators.push_back(net_.variable(m).name);
      if (mediators.empty()) continue;
      std::vector<std::string> nodes{e.parent, e.child};
      nodes.insert(nodes.end(), mediators.begin(), mediators.end());
      std::string via;
      for (const auto& m : mediators) via += (via.empty() ? "" : ", ") + m;
      report(Rule::R3, nodes, {e},
             "risk factor '" + e.parent + "' has a direct edge to '" + e.child +
                 "' although it already acts through pathogenic mechanism(s) " + via,
             "risk factors act through mechanisms");
    }
  }

  void complication_rule() {
    for (std::size_t v = 0; v < net_.size(); ++v) {
      if (net_.variable(v).role != Role::Complication) continue;
      const std::size_t roots[] = {v};
      const auto above = ancestor_mask(net_.dag(), roots);
      bool explained = false;
      for (std::size_t a = 0; a < net_.size(); ++a) {
        const Role r = net_.variable(a).role;
        if (a != v && above[a] && (is_condition_like(r) || r == Role::Treatment)) explained = true;
      }
      if (!explained)
        report(Rule::R5, {net_.variable(v).name}, {},
               "complication '" + net_.variable(v).name + "' has no condition, comorbidity or treatment among its ancestors",
               "complications follow a condition or treatment");
    }
  }

  void treatment_rule() {
    if (!options_.observational_use) return;
    for (std::size_t v = 0; v < net_.size(); ++v)
      if (net_.variable(v).role == Role::Treatment && net_.parents(v).empty())
        report(Rule::R8, {net_.variable(v).name}, {},
               "treatment '" + net_.variable(v).name +
                   "' has no parents; in an observational model the decision to treat should depend on the patient "
                   "state through a decision arc",
               "treatment decisions depend on patient state");
  }

  void reliability_rule(const std::vector<IdiomInstance>& instances) {
    for (const auto& inst : instances) {
      if (inst.template_id != TemplateId::TreatmentReliability) continue;
      auto one = [&](const char* slot) -> std::optional<std::size_t> {
        auto it = inst.bindings.find(slot);
        if (it == inst.bindings.end() || it->second.size() != 1) return std::nullopt;
        return net_.find(it->second.front());
      };
      const auto t = one("treatment"), r = one("reliability"), o = one("outcome");
      if (!t || !r || !o) continue;
      const auto& parents = net_.parents(*o);
      const auto ti = std::find(parents.begin(), parents.end(), *t), ri = std::find(parents.begin(), parents.end(), *r);
      if (ti == parents.end() || ri == parents.end()) continue;
      const std::size_t tk = static_cast<std::size_t>(ti - parents.begin());
      const std::size_t rk = static_cast<std::size_t>(ri - parents.begin());
      const std::size_t withheld = not_applied_state(net_.variable(*t));

      double worst = 0.0;
      std::vector<std::size_t> radix, idx(parents.size(), 0);
      for (std::size_t p : parents) radix.push_back(net_.variable(p).cardinality());
      for (;;) {
        if (idx[tk] == withheld && idx[rk] == 0) {
          const auto base = net_.row(*o, idx);
          auto other = idx;
          for (other[rk] = 1; other[rk] < radix[rk]; ++other[rk]) {
            const auto row = net_.row(*o, other);
            for (std::size_t s = 0; s < row.size(); ++s) worst = std::max(worst, std::abs(row[s] - base[s]));
          }
        }
        std::size_t k = idx.size();
        while (k-- > 0) {
          if (++idx[k] < radix[k]) break;
          idx[k] = 0;
        }
        if (k == static_cast<std::size_t>(-1)) break;
      }
      if (worst > 1e-9) {
        const auto& tn = net_.variable(*t).name;
        const auto& rn = net_.variable(*r).name;
        const auto& on = net_.variable(*o).name;
        report(Rule::R7, {tn, rn, on}, {Edge{rn, on, false}},
               "outcome '" + on + "' still depends on '" + rn + "' when '" + tn + "' is " +
                   net_.variable(*t).states[withheld] + " (max row difference " + format_number(worst) + ")",
               "reliability matters only when treatment is applied");
      }
    }
  }

  LintReport finish() {
    std::stable_sort(findings_.begin(), findings_.end(), [&](const Finding& a, const Finding& b) {
      return std::make_tuple(static_cast<int>(a.rule), positions(a)) < std::make_tuple(static_cast<int>(b.rule), positions(b));
    });
    LintReport out;
    for (auto& f : findings_) {
      (f.severity == Severity::Error ? out.errors : out.warnings)++;
      out.by_rule[rule_id(f.rule)]++;
    }
    out.findings = std::move(findings_);
    return out;
  }

 private:
  std::vector<std::size_t> positions(const Finding& f) const {
    std::vector<std::size_t> out;
    for (const auto& n : f.nodes) out.push_back(rank_[net_.index_of(n)]);
    return out;
  }

  void report(Rule rule, std::vector<std::string> nodes, std::vector<Edge> edges, std::string message,
              std::string anchor) {
    const Severity severity = rule_severity(rule);
    if (severity == Severity::Warning && options_.disabled.count(rule)) return;
    findings_.push_back({rule, severity, std::move(nodes), std::move(edges), std::move(message), std::move(anchor)});
  }

  const BayesNet& net_;
  const LintOptions& options_;
  std::vector<std::size_t> rank_;
  std::vector<Finding> findings_;
};

}  // namespace

LintReport lint(const BayesNet& net, const std::vector<IdiomInstance>* instances, const LintOptions& options) {
  Linter linter(net, options);
  linter.edge_rules();
  linter.mediation_rule();
  linter.complication_rule();
  linter.treatment_rule();
  if (instances) linter.reliability_rule(*instances);
  return linter.finish();
}

std::string format_report(const LintReport& report) {
  std::string out;
  for (const auto& f : report.findings) {
    out += rule_id(f.rule) + " " + std::string(to_string(f.severity)) + ": " + f.message + " [" + f.anchor + "]\n";
  }
  out += std::to_string(report.errors) + " error(s), " + std::to_string(report.warnings) + " warning(s)\n";
  return out;
}

std::string report_json(const LintReport& report) {
  using json = nlohmann::ordered_json;
  json findings = json::array();
  for (const auto& f : report.findings) {
    json edges = json::array();
    for (const auto& e : f.edges) edges.push_back({{"from", e.parent}, {"to", e.child}, {"decision", e.decision}});
    findings.push_back({{"rule", rule_id(f.rule)},
                        {"severity", to_string(f.severity)},
                        {"nodes", f.nodes},
                        {"edges", edges},
                        {"message", f.message},
                        {"anchor", f.anchor}});
  }
  json root = {{"findings", findings},
               {"summary", {{"errors", report.errors}, {"warnings", report.warnings}, {"by_rule", report.by_rule}}}};
  return root.dump(2) + "\n";
}

double CoverageReport::fraction() const {
  const std::size_t total = covered.size() + uncovered.size();
  return total == 0 ? 1.0 : static_cast<double>(covered.size()) / static_cast<double>(total);
}

CoverageReport coverage(const BayesNet& net, const std::vector<IdiomInstance>& instances) {
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> credit;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const std::string label = inst.label.empty() ? "idiom" + std::to_string(i + 1) : inst.label;
    for (const auto& fe : instantiate(inst).edges) {
      auto& who = credit[{fe.parent, fe.child}];
      if (std::find(who.begin(), who.end(), label) == who.end()) who.push_back(label);
    }
  }
  CoverageReport out;
  for (const auto& e : net.edges()) {
    auto it = credit.find({e.parent, e.child});
    if (it == credit.end())
      out.uncovered.push_back(e);
    else
      out.covered.push_back({e, it->second});
  }
  return out;
}

}  // namespace idiombn
