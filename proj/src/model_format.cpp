#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "idiombn/model_format.hpp"

namespace idiombn {

namespace {

void add(std::vector<Diagnostic>& out, Severity severity, SourcePos pos, std::string_view code, std::string message) {
  out.push_back({severity, pos, std::string(code), std::move(message)});
}

std::string_view build_code(BuildErrorCode code) {
  switch (code) {
    case BuildErrorCode::EmptyName:
    case BuildErrorCode::DuplicateVariable: return diag::kDuplicateName;
    case BuildErrorCode::InvalidStates: return diag::kInvalidStates;
    case BuildErrorCode::UnknownVariable: return diag::kUnknownVariable;
    case BuildErrorCode::SelfLoop: return diag::kSelfLoop;
    case BuildErrorCode::DuplicateEdge: return diag::kDuplicateName;
    case BuildErrorCode::DecisionArcTarget: return diag::kDecisionArc;
    case BuildErrorCode::CycleDetected: return diag::kCompositionCycle;
    case BuildErrorCode::MissingCpt: return diag::kMissingCpt;
    case BuildErrorCode::DuplicateCpt: return diag::kDuplicateCpt;
    case BuildErrorCode::CptMismatch: return diag::kCptMismatch;
    case BuildErrorCode::RowCountMismatch: return diag::kRowArity;
    case BuildErrorCode::InvalidProbability: return diag::kProbabilityRange;
    case BuildErrorCode::RowNotNormalized: return diag::kRowSum;
  }
  return diag::kSyntax;
}

const IdiomTemplate* template_for(const std::string& name) {
  auto id = parse_template(name);
  return id ? &find_template(*id) : nullptr;
}

// Odometer over parent state spaces, last parent fastest.
bool advance(std::vector<std::size_t>& idx, const std::vector<std::size_t>& radix) {
  std::size_t k = idx.size();
  while (k-- > 0) {
    if (++idx[k] < radix[k]) return true;
    idx[k] = 0;
  }
  return false;
}

}  // namespace

ElaborateResult elaborate(const ModelDocument& doc) {
  ElaborateResult result;
  auto& diags = result.diagnostics;

  RoleLookup roles;
  std::map<std::string, const VariableDecl*> var_decls;
  std::vector<Variable> variables;
  for (const auto& v : doc.variables) {
    roles.emplace(v.name, v.role);
    var_decls.emplace(v.name, &v);
    variables.push_back(Variable{v.name, v.states, v.role});
  }

  std::vector<Fragment> fragments;
  std::map<std::string, SourcePos> source_pos;
  for (const auto& d : doc.idioms) {
    auto id = parse_template(d.template_name);
    if (!id) {
      add(diags, Severity::Error, d.pos, diag::kUnknownTemplate, "unknown idiom template '" + d.template_name + "'");
      continue;
    }
    IdiomInstance inst{*id, {}, d.name};
    for (const auto& b : d.slots) {
      auto& names = inst.bindings[b.slot];
      names.insert(names.end(), b.names.begin(), b.names.end());
    }
    try {
      Fragment f = instantiate(inst, &roles);
      for (const auto& w : f.warnings) {
        const bool quantified = w.find("not quantified") == std::string::npos;
        add(diags, Severity::Warning, d.pos, quantified ? diag::kRoleMismatch : diag::kNotQuantified, w);
      }
      f.warnings.clear();
      source_pos[d.name] = d.pos;
      fragments.push_back(std::move(f));
      result.instances.push_back(std::move(inst));
    } catch (const Error& e) {
      std::string_view code = diag::kSyntax;
      switch (e.code()) {
        case ErrorCode::UnknownSlot: code = diag::kUnknownSlot; break;
        case ErrorCode::MissingSlot: code = diag::kMissingSlot; break;
        case ErrorCode::ArityViolation: code = diag::kArity; break;
        case ErrorCode::DuplicateBinding: code = diag::kDuplicateBinding; break;
        default: break;
      }
      add(diags, Severity::Error, d.pos, code, e.what());
    }
  }

  for (const auto& e : doc.edges) {
    if (e.from == e.to) {
      add(diags, Severity::Error, e.pos, diag::kSelfLoop, "edge " + e.from + " -> " + e.to + " is a self-loop");
      continue;
    }
    const std::string label = "edge " + e.from + (e.decision ? " => " : " -> ") + e.to + " (line " +
                              std::to_string(e.pos.line) + ")";
    Fragment f;
    for (const auto* n : {&e.from, &e.to}) {
      auto it = roles.find(*n);
      f.variables.push_back({*n, {it == roles.end() ? Role::Unclassified : it->second}});
    }
    std::sort(f.variables.begin(), f.variables.end(), [](auto& a, auto& b) { return a.name < b.name; });
    f.variables.erase(std::unique(f.variables.begin(), f.variables.end(),
                                  [](auto& a, auto& b) { return a.name == b.name; }),
                      f.variables.end());
    f.edges.push_back({e.from, e.to, e.decision, {label}});
    source_pos[label] = e.pos;
    fragments.push_back(std::move(f));
  }

  // First declaration contributing an edge locates edge-level errors.
  std::map<std::pair<std::string, std::string>, SourcePos> edge_pos;
  Fragment composed;
  try {
    composed = compose(fragments);
  } catch (const Error& e) {
    SourcePos pos = doc.idioms.empty() ? (doc.edges.empty() ? SourcePos{} : doc.edges.front().pos) : doc.idioms.front().pos;
    for (const auto& f : fragments)
      for (const auto& fe : f.edges)
        if (std::find(e.nodes().begin(), e.nodes().end(), fe.parent) != e.nodes().end() &&
            std::find(e.nodes().begin(), e.nodes().end(), fe.child) != e.nodes().end() && !fe.sources.empty()) {
          auto it = source_pos.find(fe.sources.front());
          if (it != source_pos.end() &&
              std::tie(it->second.line, it->second.column) > std::tie(pos.line, pos.column))
            pos = it->second;
        }
    add(diags, Severity::Error, pos, diag::kCompositionCycle, e.what());
    return result;
  }

  std::vector<Edge> edges;
  for (const auto& fe : composed.edges) {
    edges.push_back(Edge{fe.parent, fe.child, fe.decision});
    std::optional<SourcePos> pos;
    for (const auto& s : fe.sources) {
      auto it = source_pos.find(s);
      if (it != source_pos.end() &&
          (!pos || std::tie(it->second.line, it->second.column) < std::tie(pos->line, pos->column)))
        pos = it->second;
    }
    edge_pos[{fe.parent, fe.child}] = pos.value_or(SourcePos{});
  }

  std::vector<Cpt> cpts;
  std::map<std::string, SourcePos> cpt_pos;
  for (const auto& c : doc.cpts) {
    cpt_pos.emplace(c.child, c.pos);
    Cpt cpt{c.child, c.parents, {}};
    std::vector<std::size_t> radix;
    bool resolvable = true;
    for (const auto& p : c.parents) {
      auto it = var_decls.find(p);
      if (it == var_decls.end() || it->second->states.empty()) {
        resolvable = false;
        break;
      }
      radix.push_back(it->second->states.size());
    }
    if (!resolvable) {
      add(diags, Severity::Error, c.pos, diag::kUnknownVariable, "cpt for '" + c.child + "' names an undeclared parent");
      continue;
    }
    std::vector<std::size_t> idx(radix.size(), 0);
    bool complete = true;
    do {
      std::vector<std::string> keys;
      for (std::size_t k = 0; k < idx.size(); ++k) keys.push_back(var_decls.at(c.parents[k])->states[idx[k]]);
      auto row = std::find_if(c.rows.begin(), c.rows.end(), [&](const RowDecl& r) { return r.keys == keys; });
      if (row == c.rows.end()) {
        complete = false;
        break;
      }
      cpt.table.insert(cpt.table.end(), row->values.begin(), row->values.end());
    } while (advance(idx, radix));
    if (!complete) {
      add(diags, Severity::Error, c.pos, diag::kMissingRow, "cpt for '" + c.child + "' does not cover every parent state");
      continue;
    }
    cpts.push_back(std::move(cpt));
  }

  auto built = build_network(std::move(variables), std::move(edges), std::move(cpts));
  for (const auto& err : built.errors()) {
    SourcePos pos;
    const std::string first = err.nodes.empty() ? std::string() : err.nodes.front();
    std::string message = err.message;
    switch (err.code) {
      case BuildErrorCode::MissingCpt:
        message = "missing CPT for '" + first + "'";
        [[fallthrough]];
      case BuildErrorCode::EmptyName:
      case BuildErrorCode::DuplicateVariable:
      case BuildErrorCode::InvalidStates:
        if (auto it = var_decls.find(first); it != var_decls.end()) pos = it->second->pos;
        break;
      case BuildErrorCode::SelfLoop:
      case BuildErrorCode::DuplicateEdge:
      case BuildErrorCode::DecisionArcTarget:
      case BuildErrorCode::CycleDetected:
      case BuildErrorCode::UnknownVariable:
        if (err.nodes.size() >= 2) {
          if (auto it = edge_pos.find({err.nodes[0], err.nodes[1]}); it != edge_pos.end()) pos = it->second;
        } else if (auto it = cpt_pos.find(first); it != cpt_pos.end()) {
          pos = it->second;
        } else if (auto it = var_decls.find(first); it != var_decls.end()) {
          pos = it->second->pos;
        }
        break;
      default:
        if (auto it = cpt_pos.find(first); it != cpt_pos.end()) pos = it->second;
        break;
    }
    add(diags, Severity::Error, pos, build_code(err.code), message);
  }
  if (built.ok() && !has_errors(diags)) result.net = std::move(built).value();
  return result;
}

std::string format_number(double value) {
  if (value == 0.0 || !std::isfinite(value)) return value == 0.0 ? "0" : std::to_string(value);
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, 11);
  std::string sci(buf, res.ptr);
  const bool negative = sci.front() == '-';
  if (negative) sci.erase(0, 1);
  const auto e = sci.find('e');
  const int exponent = std::stoi(sci.substr(e + 1));
  std::string digits;
  for (char c : sci.substr(0, e))
    if (c != '.') digits += c;
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();

  std::string out;
  const int point = exponent + 1;  // digits before the decimal point
  if (point <= 0) {
    out = "0." + std::string(static_cast<std::size_t>(-point), '0') + digits;
  } else if (static_cast<std::size_t>(point) >= digits.size()) {
    out = digits + std::string(static_cast<std::size_t>(point) - digits.size(), '0');
  } else {
    out = digits.substr(0, static_cast<std::size_t>(point)) + "." + digits.substr(static_cast<std::size_t>(point));
  }
  return negative ? "-" + out : out;
}

std::string serialize(const ModelDocument& doc) {
  std::ostringstream out;
  std::vector<std::string> sections;

  if (!doc.preamble.empty()) {
    std::string s;
    for (const auto& line : doc.preamble) s += line + "\n";
    sections.push_back(s);
  }

  std::map<std::string, const VariableDecl*> vars;
  for (const auto& v : doc.variables) vars.emplace(v.name, &v);

  if (!doc.variables.empty()) {
    std::string s;
    for (const auto& [name, v] : vars) {
      s += "variable " + name + " { states: ";
      for (std::size_t k = 0; k < v->states.size(); ++k) s += (k ? ", " : "") + v->states[k];
      s += "; role: " + std::string(role_name(v->role)) + " }\n";
    }
    sections.push_back(s);
  }

  if (!doc.idioms.empty()) {
    std::vector<const IdiomDecl*> sorted;
    for (const auto& d : doc.idioms) sorted.push_back(&d);
    std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->name < b->name; });
    std::string s;
    for (const auto* d : sorted) {
      const IdiomTemplate* tpl = template_for(d->template_name);
      std::vector<const SlotBinding*> slots;
      for (const auto& b : d->slots) slots.push_back(&b);
      if (tpl) {
        auto rank = [&](const SlotBinding* b) {
          for (std::size_t k = 0; k < tpl->slots.size(); ++k)
            if (tpl->slots[k].name == b->slot) return k;
          return tpl->slots.size();
        };
        std::stable_sort(slots.begin(), slots.end(), [&](auto* a, auto* b) { return rank(a) < rank(b); });
      }
      s += "idiom " + d->template_name + " " + d->name + " {";
      for (const auto* b : slots) {
        const Slot* slot = tpl ? tpl->slot(b->slot) : nullptr;
        const bool list = slot ? slot->arity == Arity::Many : b->list;
        s += " " + b->slot + ": ";
        if (list) s += "[";
        for (std::size_t k = 0; k < b->names.size(); ++k) s += (k ? ", " : "") + b->names[k];
        if (list) s += "]";
        s += ";";
      }
      s += " }\n";
    }
    sections.push_back(s);
  }

  if (!doc.edges.empty()) {
    std::vector<const EdgeDecl*> sorted;
    for (const auto& e : doc.edges) sorted.push_back(&e);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](auto* a, auto* b) { return std::tie(a->from, a->to) < std::tie(b->from, b->to); });
    std::string s;
    for (const auto* e : sorted) s += "edge " + e->from + (e->decision ? " => " : " -> ") + e->to + "\n";
    sections.push_back(s);
  }

  if (!doc.cpts.empty()) {
    std::vector<const CptDecl*> sorted;
    for (const auto& c : doc.cpts) sorted.push_back(&c);
    std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->child < b->child; });
    auto numbers = [](const std::vector<double>& values) {
      std::string s;
      for (std::size_t k = 0; k < values.size(); ++k) s += (k ? ", " : "") + format_number(values[k]);
      return s;
    };
    std::string s;
    for (const auto* c : sorted) {
      if (c->parents.empty()) {
        s += "cpt " + c->child + " { prior: " + (c->rows.empty() ? std::string() : numbers(c->rows.front().values)) +
             "; }\n";
        continue;
      }
      // Rows in parent-state order when every key resolves, else as written.
      auto position = [&](const RowDecl& r) {
        std::vector<std::size_t> pos;
        for (std::size_t k = 0; k < r.keys.size() && k < c->parents.size(); ++k) {
          auto it = vars.find(c->parents[k]);
          if (it == vars.end()) return std::vector<std::size_t>{};
          const auto& st = it->second->states;
          pos.push_back(static_cast<std::size_t>(std::find(st.begin(), st.end(), r.keys[k]) - st.begin()));
        }
        return pos;
      };
      std::vector<const RowDecl*> rows;
      for (const auto& r : c->rows) rows.push_back(&r);
      std::stable_sort(rows.begin(), rows.end(), [&](auto* a, auto* b) { return position(*a) < position(*b); });
      s += "cpt " + c->child + " given (";
      for (std::size_t k = 0; k < c->parents.size(); ++k) s += (k ? ", " : "") + c->parents[k];
      s += ") {\n";
      for (const auto* r : rows) {
        s += "  row(";
        for (std::size_t k = 0; k < r->keys.size(); ++k) s += (k ? ", " : "") + r->keys[k];
        s += "): " + numbers(r->values) + ";\n";
      }
      s += "}\n";
    }
    sections.push_back(s);
  }

  for (std::size_t k = 0; k < sections.size(); ++k) out << (k ? "\n" : "") << sections[k];
  return out.str();
}

namespace {

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// `name\n[role]` with a DOT line-break escape.
std::string dot_label(const Variable& v) {
  const std::string quoted = dot_quote(v.name);
  return quoted.substr(0, quoted.size() - 1) + "\\n[" + std::string(role_name(v.role)) + "]\"";
}

}  // namespace

std::string export_dot(const BayesNet& net, const std::vector<IdiomInstance>& instances) {
  std::ostringstream out;
  out << "digraph idiombn {\n";
  out << "  node [shape=ellipse];\n";

  std::map<std::string, std::string> home;  // variable -> cluster label that draws it
  std::vector<std::string> overlaps;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const std::string label = inst.label.empty() ? "idiom" + std::to_string(i + 1) : inst.label;
    std::vector<std::string> members;
    for (const auto& slot : find_template(inst.template_id).slots) {
      auto it = inst.bindings.find(slot.name);
      if (it == inst.bindings.end()) continue;
      for (const auto& name : it->second) {
        if (!net.contains(name)) continue;
        auto [h, fresh] = home.emplace(name, label);
        if (fresh)
          members.push_back(name);
        else if (h->second != label)
          overlaps.push_back("// idiom overlap: " + name + " also in " + label + " (drawn in " + h->second + ")");
      }
    }
    out << "  subgraph " << dot_quote("cluster_" + std::to_string(i + 1)) << " {\n";
    out << "    label=" << dot_quote(label + ": " + std::string(template_name(inst.template_id))) << ";\n";
    for (const auto& name : members) {
      out << "    " << dot_quote(name) << " [label=" << dot_label(net.variable(name)) << "];\n";
    }
    out << "  }\n";
  }
  for (const auto& line : overlaps) out << "  " << line << "\n";
  for (const auto& v : net.variables()) {
    if (home.count(v.name)) continue;
    out << "  " << dot_quote(v.name) << " [label=" << dot_label(v) << "];\n";
  }
  for (const auto& e : net.edges()) {
    out << "  " << dot_quote(e.parent) << " -> " << dot_quote(e.child);
    if (e.decision) out << " [style=dashed]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

std::string export_json(const ModelDocument& doc) {
  using json = nlohmann::ordered_json;
  json root = json::object();
  root["variables"] = json::array();
  for (const auto& v : doc.variables)
    root["variables"].push_back({{"name", v.name}, {"states", v.states}, {"role", role_name(v.role)}});
  root["idioms"] = json::array();
  for (const auto& d : doc.idioms) {
    json slots = json::array();
    for (const auto& b : d.slots) slots.push_back({{"slot", b.slot}, {"variables", b.names}});
    root["idioms"].push_back({{"template", d.template_name}, {"name", d.name}, {"slots", slots}});
  }
  root["edges"] = json::array();
  for (const auto& e : doc.edges) root["edges"].push_back({{"from", e.from}, {"to", e.to}, {"decision", e.decision}});
  root["cpts"] = json::array();
  for (const auto& c : doc.cpts) {
    json rows = json::array();
    for (const auto& r : c.rows) rows.push_back({{"key", r.keys}, {"probabilities", r.values}});
    root["cpts"].push_back({{"variable", c.child}, {"parents", c.parents}, {"rows", rows}});
  }
  return root.dump(2) + "\n";
}

ModelDocument to_document(const BayesNet& net, const std::vector<IdiomInstance>& instances) {
  ModelDocument doc;
  for (const auto& v : net.variables()) doc.variables.push_back({v.name, v.states, v.role, {}});

  std::set<std::pair<std::string, std::string>> covered;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const auto& tpl = find_template(inst.template_id);
    IdiomDecl d{std::string(template_name(inst.template_id)),
                inst.label.empty() ? "idiom" + std::to_string(i + 1) : inst.label,
                {},
                {}};
    for (const auto& slot : tpl.slots) {
      auto it = inst.bindings.find(slot.name);
      if (it == inst.bindings.end()) continue;
      d.slots.push_back({slot.name, it->second, slot.arity == Arity::Many, {}});
    }
    for (const auto& fe : instantiate(inst).edges)
      if (net.has_edge(fe.parent, fe.child) && net.is_decision_edge(fe.parent, fe.child) == fe.decision)
        covered.insert({fe.parent, fe.child});
    doc.idioms.push_back(std::move(d));
  }
  for (const auto& e : net.edges())
    if (!covered.count({e.parent, e.child})) doc.edges.push_back({e.parent, e.child, e.decision, {}});

  for (std::size_t v = 0; v < net.size(); ++v) {
    const Cpt& cpt = net.cpt(v);
    CptDecl c{cpt.child, cpt.parents, {}, {}};
    const std::size_t card = net.variable(v).cardinality();
    std::vector<std::size_t> radix;
    for (const auto& p : cpt.parents) radix.push_back(net.variable(p).cardinality());
    std::vector<std::size_t> idx(radix.size(), 0);
    std::size_t row = 0;
    do {
      RowDecl r;
      for (std::size_t k = 0; k < idx.size(); ++k) r.keys.push_back(net.variable(cpt.parents[k]).states[idx[k]]);
      r.values.assign(cpt.table.begin() + static_cast<std::ptrdiff_t>(row * card),
                      cpt.table.begin() + static_cast<std::ptrdiff_t>((row + 1) * card));
      c.rows.push_back(std::move(r));
      ++row;
    } while (advance(idx, radix));
    doc.cpts.push_back(std::move(c));
  }
  return doc;
}

}  // namespace idiombn
