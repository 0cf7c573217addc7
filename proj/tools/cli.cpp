#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "idiombn/causal.hpp"
#include "idiombn/fixtures.hpp"
#include "idiombn/linter.hpp"
#include "idiombn/model_format.hpp"
#include "json.hpp"

namespace idiombn::cli {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Model {
  std::optional<ModelDocument> document;
  std::optional<BayesNet> net;
  std::vector<IdiomInstance> instances;
  std::vector<Diagnostic> diagnostics;
};

Model load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  Model m;
  auto parsed = parse(buf.str());
  m.diagnostics = std::move(parsed.diagnostics);
  if (!parsed.ok()) return m;
  m.document = std::move(parsed.document);
  auto elaborated = elaborate(*m.document);
  m.diagnostics.insert(m.diagnostics.end(), elaborated.diagnostics.begin(), elaborated.diagnostics.end());
  m.instances = std::move(elaborated.instances);
  m.net = std::move(elaborated.net);
  return m;
}

json diagnostic_json(const Diagnostic& d) {
  return {{"severity", to_string(d.severity)},
          {"line", d.pos.line},
          {"column", d.pos.column},
          {"code", d.code},
          {"message", d.message}};
}

json finding_json(const Finding& f) {
  json edges = json::array();
  for (const auto& e : f.edges) edges.push_back({{"from", e.parent}, {"to", e.child}, {"decision", e.decision}});
  return {{"rule", rule_id(f.rule)}, {"severity", to_string(f.severity)}, {"nodes", f.nodes}, {"edges", edges},
          {"message", f.message},    {"anchor", f.anchor}};
}

json edge_json(const Edge& e) { return {{"from", e.parent}, {"to", e.child}, {"decision", e.decision}}; }

std::string edge_text(const Edge& e) { return e.parent + (e.decision ? " => " : " -> ") + e.child; }

// Prints model-loading diagnostics; returns true when the model is usable.
bool report_load(const Model& m, const std::string& file, std::ostream& err) {
  for (const auto& d : m.diagnostics) err << format_diagnostic(d, file) << "\n";
  return m.net.has_value();
}

Rule parse_rule(const std::string& text) {
  for (int r = 1; r <= static_cast<int>(kRuleCount); ++r)
    if (text == rule_id(static_cast<Rule>(r))) return static_cast<Rule>(r);
  throw UsageError("unknown rule '" + text + "' (expected R1 to R" + std::to_string(kRuleCount) + ")");
}

Assignment parse_assignments(const std::vector<std::string>& items, const char* flag) {
  Assignment out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
      throw UsageError(std::string(flag) + " expects VAR=state, got '" + item + "'");
    auto [it, fresh] = out.emplace(item.substr(0, eq), item.substr(eq + 1));
    if (!fresh && it->second != item.substr(eq + 1))
      throw UsageError(std::string(flag) + " gives '" + it->first + "' two different states");
  }
  return out;
}

std::string fixed6(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", p);
  return buf;
}

struct LintFlags {
  std::vector<std::string> disabled;
  bool not_observational = false;

  LintOptions options() const {
    LintOptions o;
    for (const auto& r : disabled) o.disabled.insert(parse_rule(r));
    o.observational_use = !not_observational;
    return o;
  }
};

int cmd_check(const std::string& file, bool as_json, bool no_warn, const LintFlags& flags, std::ostream& err) {
  const LintOptions options = flags.options();
  Model m = load(file);
  std::optional<LintReport> report;
  if (m.net) report = lint(*m.net, &m.instances, options);

  std::size_t errors = 0, warnings = 0;
  for (const auto& d : m.diagnostics) (d.severity == Severity::Error ? errors : warnings)++;
  if (report) {
    errors += report->errors;
    warnings += report->warnings;
  }

  if (as_json) {
    json diags = json::array(), findings = json::array();
    for (const auto& d : m.diagnostics) diags.push_back(diagnostic_json(d));
    if (report)
      for (const auto& f : report->findings) findings.push_back(finding_json(f));
    json root = {{"file", file},
                 {"diagnostics", diags},
                 {"findings", findings},
                 {"summary", {{"errors", errors}, {"warnings", warnings}}}};
    err << root.dump(2) << "\n";
  } else {
    for (const auto& d : m.diagnostics) err << format_diagnostic(d, file) << "\n";
    if (report)
      for (const auto& f : report->findings)
        err << file << ": " << rule_id(f.rule) << " " << to_string(f.severity) << ": " << f.message << " [" << f.anchor
            << "]\n";
    err << file << ": " << errors << " error(s), " << warnings << " warning(s)\n";
  }
  if (errors > 0 || (warnings > 0 && !no_warn)) return kDiagnostics;
  return kOk;
}

int cmd_lint(const std::string& file, bool as_json, const LintFlags& flags, std::ostream& out, std::ostream& err) {
  const LintOptions options = flags.options();
  Model m = load(file);
  if (!report_load(m, file, err)) return kDiagnostics;
  const LintReport report = lint(*m.net, &m.instances, options);
  const CoverageReport cov = coverage(*m.net, m.instances);
  if (as_json) {
    json findings = json::array(), covered = json::array(), uncovered = json::array();
    for (const auto& f : report.findings) findings.push_back(finding_json(f));
    for (const auto& c : cov.covered) covered.push_back({{"edge", edge_json(c.edge)}, {"instances", c.instances}});
    for (const auto& e : cov.uncovered) uncovered.push_back(edge_json(e));
    json root = {{"findings", findings},
                 {"summary", {{"errors", report.errors}, {"warnings", report.warnings}, {"by_rule", report.by_rule}}},
                 {"coverage", {{"fraction", cov.fraction()}, {"covered", covered}, {"uncovered", uncovered}}}};
    out << root.dump(2) << "\n";
  } else {
    out << format_report(report);
    out << "coverage: " << cov.covered.size() << "/" << cov.covered.size() + cov.uncovered.size()
        << " edges from idioms\n";
    for (const auto& e : cov.uncovered) out << "  uncovered: " << edge_text(e) << "\n";
  }
  return report.errors > 0 ? kDiagnostics : kOk;
}

int cmd_query(const std::string& file, const std::vector<std::string>& targets, const std::vector<std::string>& ev,
              const std::vector<std::string>& dos, bool counterfactual, bool as_json, std::ostream& out,
              std::ostream& err) {
  if (counterfactual && dos.empty()) throw UsageError("--counterfactual requires at least one --do");
  const Evidence evidence = parse_assignments(ev, "--evidence");
  const Intervention intervention = parse_assignments(dos, "--do");
  Model m = load(file);
  if (!report_load(m, file, err)) return kDiagnostics;
  const BayesNet& net = *m.net;

  const QueryMode mode =
      dos.empty() ? QueryMode::Observational : (counterfactual ? QueryMode::Counterfactual : QueryMode::Interventional);
  std::vector<Distribution> results;
  std::vector<Edge> removed;
  std::vector<std::string> notes;
  try {
    for (const auto& t : targets) {
      if (mode == QueryMode::Observational) {
        results.push_back(posterior(net, t, evidence));
      } else {
        CausalQueryResult r = mode == QueryMode::Interventional ? interventional_query(net, t, intervention, evidence)
                                                                : counterfactual_query(net, evidence, intervention, t);
        results.push_back(std::move(r.distribution));
        removed = std::move(r.removed_edges);
        notes = std::move(r.notes);
      }
    }
  } catch (const Error& e) {
    err << "query failed: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ImpossibleEvidence:
      case ErrorCode::TooLarge: return kQueryFailure;
      default: return kUsage;
    }
  }

  if (as_json) {
    json res = json::array(), cut = json::array();
    for (const auto& d : results) {
      json probs = json::object();
      for (std::size_t s = 0; s < d.states.size(); ++s) probs[d.states[s]] = d.probabilities[s];
      res.push_back({{"variable", d.variable}, {"probabilities", probs}});
    }
    for (const auto& e : removed) cut.push_back(edge_json(e));
    json root = {{"mode", to_string(mode)}, {"evidence", evidence},  {"intervention", intervention},
                 {"results", res},          {"removed_edges", cut}, {"notes", notes}};
    out << root.dump(2) << "\n";
  } else {
    for (const auto& d : results) {
      out << d.variable << ":";
      for (std::size_t s = 0; s < d.states.size(); ++s) out << " " << d.states[s] << "=" << fixed6(d.probabilities[s]);
      out << "\n";
    }
  }
  return kOk;
}

int cmd_classify(const std::string& file, const SuggestionHints& hints, bool as_json, std::ostream& out,
                 std::ostream& err) {
  Model m = load(file);
  if (!report_load(m, file, err)) return kDiagnostics;
  const BayesNet& net = *m.net;
  if (net.empty()) return kOk;

  std::set<std::string> bound;
  for (const auto& inst : m.instances)
    for (const auto& [slot, names] : inst.bindings) bound.insert(names.begin(), names.end());
  const CoverageReport cov = coverage(net, m.instances);

  // Union-find over variables touched by uncovered edges or bound nowhere.
  std::vector<std::size_t> root(net.size());
  for (std::size_t v = 0; v < net.size(); ++v) root[v] = v;
  auto find = [&](std::size_t v) {
    while (root[v] != v) v = root[v] = root[root[v]];
    return v;
  };
  std::vector<bool> member(net.size(), false);
  for (std::size_t v = 0; v < net.size(); ++v)
    if (!bound.count(net.variable(v).name)) member[v] = true;
  for (const auto& e : cov.uncovered) {
    const std::size_t a = net.index_of(e.parent), b = net.index_of(e.child);
    member[a] = member[b] = true;
    root[find(a)] = find(b);
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t v = 0; v < net.size(); ++v)
    if (member[v]) groups[find(v)].push_back(v);
  std::vector<std::vector<std::size_t>> ordered;
  for (auto& [r, g] : groups) ordered.push_back(g);
  std::sort(ordered.begin(), ordered.end());

  json root_json = json::array();
  if (ordered.empty() && !as_json) out << "no suggestions\n";
  for (const auto& g : ordered) {
    std::vector<std::pair<std::string, Role>> group;
    std::vector<std::string> names;
    for (std::size_t v : g) {
      group.emplace_back(net.variable(v).name, net.variable(v).role);
      names.push_back(net.variable(v).name);
    }
    const auto ranking = suggest_idiom(group, hints);
    std::vector<std::string> ranked;
    for (auto id : ranking) ranked.emplace_back(template_name(id));
    if (as_json) {
      root_json.push_back({{"variables", names}, {"suggestions", ranked}});
    } else {
      out << "group:";
      for (const auto& n : names) out << " " << n;
      out << "\n";
      for (std::size_t k = 0; k < ranked.size(); ++k) out << "  " << k + 1 << ". " << ranked[k] << "\n";
    }
  }
  if (as_json) out << json{{"groups", root_json}}.dump(2) << "\n";
  return kOk;
}

int cmd_export(const std::string& file, bool dot, bool as_json, bool canonical, std::ostream& out, std::ostream& err) {
  if (dot + as_json + canonical != 1) throw UsageError("export needs exactly one of --dot, --json, --canonical");
  Model m = load(file);
  if (!report_load(m, file, err)) return kDiagnostics;
  if (dot)
    out << export_dot(*m.net, m.instances);
  else if (as_json)
    out << export_json(*m.document);
  else
    out << serialize(*m.document);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Build, check and query idiom-based Bayesian network models", "idbn"};
  app.require_subcommand(1);

  std::string file;
  bool as_json = false, no_warn = false;
  LintFlags lint_flags;

  auto* check = app.add_subcommand("check", "Parse, elaborate and lint a model; report to standard error");
  check->add_option("file", file, "Model file (.idbn)")->required();
  check->add_flag("--json", as_json, "JSON report");
  check->add_flag("--no-warn", no_warn, "Warnings do not affect the exit status");
  check->add_option("--disable", lint_flags.disabled, "Skip a warning rule (e.g. R4)");
  check->add_flag("--not-observational", lint_flags.not_observational, "Model is not used observationally (skips R8)");

  auto* lint_cmd = app.add_subcommand("lint", "Lint findings and idiom coverage on standard output");
  lint_cmd->add_option("file", file, "Model file (.idbn)")->required();
  lint_cmd->add_flag("--json", as_json, "JSON report");
  lint_cmd->add_option("--disable", lint_flags.disabled, "Skip a warning rule (e.g. R4)");
  lint_cmd->add_flag("--not-observational", lint_flags.not_observational,
                     "Model is not used observationally (skips R8)");

  std::vector<std::string> targets, evidence, dos;
  bool counterfactual = false;
  auto* query = app.add_subcommand("query", "Posterior distributions");
  query->add_option("file", file, "Model file (.idbn)")->required();
  query->add_option("--target", targets, "Variable to report")->required();
  query->add_option("--evidence", evidence, "Observation VAR=state");
  query->add_option("--do", dos, "Intervention VAR=state");
  query->add_flag("--counterfactual", counterfactual, "Evidence is actual-world, --do is hypothetical");
  query->add_flag("--json", as_json, "JSON output");

  bool human_reported = false, late_effect = false, mediator_observable = false, mediator_hidden = false;
  auto* classify = app.add_subcommand("classify", "Idiom suggestions for variables no idiom covers");
  classify->add_option("file", file, "Model file (.idbn)")->required();
  classify->add_flag("--human-reported", human_reported, "Observations are reported by people");
  classify->add_flag("--late-effect", late_effect, "Consequences appear later in time");
  auto* obs = classify->add_flag("--mediator-observable", mediator_observable, "Mediating process can be observed");
  classify->add_flag("--mediator-hidden", mediator_hidden, "Mediating process is unobservable")->excludes(obs);
  classify->add_flag("--json", as_json, "JSON output");

  bool dot = false, export_json_flag = false, canonical = false;
  auto* exp = app.add_subcommand("export", "DOT, JSON or canonical model text");
  exp->add_option("file", file, "Model file (.idbn)")->required();
  exp->add_flag("--dot", dot, "Graphviz DOT with idiom clusters");
  exp->add_flag("--json", export_json_flag, "JSON document");
  exp->add_flag("--canonical", canonical, "Canonical model text");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (*check) return cmd_check(file, as_json, no_warn, lint_flags, err);
    if (*lint_cmd) return cmd_lint(file, as_json, lint_flags, out, err);
    if (*query) return cmd_query(file, targets, evidence, dos, counterfactual, as_json, out, err);
    if (*classify) {
      SuggestionHints hints;
      if (human_reported) hints.human_reported = true;
      if (late_effect) hints.temporal_late_effect = true;
      if (mediator_observable) hints.mediator_observable = true;
      if (mediator_hidden) hints.mediator_observable = false;
      return cmd_classify(file, hints, as_json, out, err);
    }
    if (*exp) return cmd_export(file, dot, export_json_flag, canonical, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace idiombn::cli
