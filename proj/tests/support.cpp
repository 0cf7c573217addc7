#include "support.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace testing_support {

namespace {

// Visits every full assignment with its joint probability.
template <typename Visit>
void for_each_world(const BayesNet& net, Visit visit) {
  const std::size_t n = net.size();
  std::vector<std::vector<std::size_t>> parent_idx(n);
  for (std::size_t v = 0; v < n; ++v)
    for (const auto& p : net.cpt(v).parents) parent_idx[v].push_back(net.index_of(p));
  std::vector<std::size_t> world(n, 0);
  for (;;) {
    double p = 1.0;
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t row = 0;
      for (std::size_t u : parent_idx[v]) row = row * net.variable(u).cardinality() + world[u];
      p *= net.cpt(v).table[row * net.variable(v).cardinality() + world[v]];
    }
    visit(world, p);
    std::size_t k = n;
    while (k-- > 0) {
      if (++world[k] < net.variable(k).cardinality()) break;
      world[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) return;
  }
}

std::vector<std::pair<std::size_t, std::size_t>> observed(const BayesNet& net, const Evidence& evidence) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [name, state] : evidence) {
    const auto& v = net.variable(name);
    const auto it = std::find(v.states.begin(), v.states.end(), state);
    out.emplace_back(net.index_of(name), static_cast<std::size_t>(it - v.states.begin()));
  }
  return out;
}

}  // namespace

std::vector<double> oracle_posterior(const BayesNet& net, const std::string& target, const Evidence& evidence) {
  const auto obs = observed(net, evidence);
  const std::size_t t = net.index_of(target);
  std::vector<double> acc(net.variable(t).cardinality(), 0.0);
  for_each_world(net, [&](const std::vector<std::size_t>& w, double p) {
    for (auto [v, s] : obs)
      if (w[v] != s) return;
    acc[w[t]] += p;
  });
  double total = 0.0;
  for (double a : acc) total += a;
  for (double& a : acc) a /= total;
  return acc;
}

double oracle_probability(const BayesNet& net, const Evidence& evidence) {
  const auto obs = observed(net, evidence);
  double total = 0.0;
  for_each_world(net, [&](const std::vector<std::size_t>& w, double p) {
    for (auto [v, s] : obs)
      if (w[v] != s) return;
    total += p;
  });
  return total;
}

double dependence(const BayesNet& net, const std::vector<std::size_t>& x, const std::vector<std::size_t>& y,
                  const std::vector<std::size_t>& z) {
  using Key = std::vector<std::size_t>;
  std::map<Key, std::map<std::pair<Key, Key>, double>> table;  // z -> (x, y) -> p
  auto pick = [](const std::vector<std::size_t>& w, const std::vector<std::size_t>& vars) {
    Key k;
    for (std::size_t v : vars) k.push_back(w[v]);
    return k;
  };
  for_each_world(net, [&](const std::vector<std::size_t>& w, double p) {
    table[pick(w, z)][{pick(w, x), pick(w, y)}] += p;
  });
  double worst = 0.0;
  for (const auto& [zk, joint] : table) {
    double pz = 0.0;
    std::map<Key, double> px, py;
    for (const auto& [xy, p] : joint) {
      pz += p;
      px[xy.first] += p;
      py[xy.second] += p;
    }
    if (pz < 1e-12) continue;
    for (const auto& [xk, a] : px)
      for (const auto& [yk, b] : py) {
        auto it = joint.find({xk, yk});
        const double pxy = it == joint.end() ? 0.0 : it->second;
        worst = std::max(worst, std::abs(pxy / pz - (a / pz) * (b / pz)));
      }
  }
  return worst;
}

BayesNet random_network(std::mt19937& rng, const RandomNetOptions& o) {
  std::uniform_int_distribution<std::size_t> count(o.min_nodes, o.max_nodes);
  const std::size_t n = count(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> card(2, std::max<std::size_t>(2, o.max_states));

  std::vector<Variable> vars;
  for (std::size_t i = 0; i < n; ++i) {
    Variable v{"N" + std::to_string(i), {}, Role::Unclassified};
    const std::size_t k = card(rng);
    for (std::size_t s = 0; s < k; ++s) v.states.push_back("s" + std::to_string(s));
    if (o.random_roles) v.role = all_roles()[std::uniform_int_distribution<std::size_t>(0, kRoleCount - 1)(rng)];
    vars.push_back(std::move(v));
  }
  // Random topological order, independent of declaration order.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<std::size_t>> parents(n);
  std::vector<Edge> edges;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i)
      if (parents[order[j]].size() < o.max_parents && unit(rng) < o.edge_probability) {
        parents[order[j]].push_back(order[i]);
        edges.push_back({vars[order[i]].name, vars[order[j]].name, false});
      }
  std::shuffle(edges.begin(), edges.end(), rng);

  auto round_to = [&](double v) {
    if (o.decimals <= 0) return v;
    const double scale = std::pow(10.0, o.decimals);
    return std::round(v * scale) / scale;
  };
  std::vector<Cpt> cpts;
  for (std::size_t v = 0; v < n; ++v) {
    std::shuffle(parents[v].begin(), parents[v].end(), rng);
    Cpt cpt{vars[v].name, {}, {}};
    std::size_t rows = 1;
    for (std::size_t p : parents[v]) {
      cpt.parents.push_back(vars[p].name);
      rows *= vars[p].states.size();
    }
    const std::size_t k = vars[v].states.size();
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> row(k);
      double sum = 0.0;
      for (double& q : row) sum += q = o.floor + (1.0 - 2.0 * o.floor) * unit(rng);
      double used = 0.0;
      for (std::size_t s = 0; s + 1 < k; ++s) used += row[s] = round_to(row[s] / sum);
      row[k - 1] = round_to(1.0 - used);
      cpt.table.insert(cpt.table.end(), row.begin(), row.end());
    }
    cpts.push_back(std::move(cpt));
  }
  return build_network(std::move(vars), std::move(edges), std::move(cpts)).value();
}

Evidence random_evidence(std::mt19937& rng, const BayesNet& net, std::size_t max_size, const std::string& exclude) {
  std::vector<std::size_t> pool;
  for (std::size_t v = 0; v < net.size(); ++v)
    if (net.variable(v).name != exclude) pool.push_back(v);
  std::shuffle(pool.begin(), pool.end(), rng);
  const std::size_t k = std::uniform_int_distribution<std::size_t>(0, std::min(max_size, pool.size()))(rng);
  Evidence e;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& v = net.variable(pool[i]);
    e[v.name] = v.states[std::uniform_int_distribution<std::size_t>(0, v.cardinality() - 1)(rng)];
  }
  return e;
}

bool same_network(const BayesNet& a, const BayesNet& b, double tolerance, std::string* why) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  if (a.size() != b.size()) return fail("variable count differs");
  for (const auto& va : a.variables()) {
    auto idx = b.find(va.name);
    if (!idx) return fail("variable " + va.name + " missing");
    const auto& vb = b.variable(*idx);
    if (va.states != vb.states || va.role != vb.role) return fail("variable " + va.name + " differs");
    const auto& ca = a.cpt(va.name);
    const auto& cb = b.cpt(va.name);
    if (ca.parents != cb.parents) return fail("parents of " + va.name + " differ");
    if (ca.table.size() != cb.table.size()) return fail("table size of " + va.name + " differs");
    for (std::size_t k = 0; k < ca.table.size(); ++k)
      if (tolerance == 0.0 ? ca.table[k] != cb.table[k] : std::abs(ca.table[k] - cb.table[k]) > tolerance)
        return fail("table of " + va.name + " differs at " + std::to_string(k));
  }
  if (a.edges().size() != b.edges().size()) return fail("edge count differs");
  for (const auto& e : a.edges())
    if (!b.has_edge(e.parent, e.child) || b.is_decision_edge(e.parent, e.child) != e.decision)
      return fail("edge " + e.parent + " -> " + e.child + " differs");
  return true;
}

std::string fixture_dir() { return IDIOMBN_TEST_FIXTURE_DIR; }

std::map<std::string, std::size_t> rule_counts(const std::vector<Finding>& findings) {
  std::map<std::string, std::size_t> out;
  for (const auto& f : findings) out[rule_id(f.rule)]++;
  return out;
}

namespace {

class DotChecker {
 public:
  explicit DotChecker(const std::string& text) : text_(text) {}

  std::string run() {
    try {
      tokenize();
      std::size_t i = 0;
      if (word(i) == "strict") ++i;
      if (word(i) != "digraph") return "expected 'digraph'";
      ++i;
      if (is_id(i)) ++i;
      i = stmt_block(i);
      if (i != toks_.size()) return "trailing tokens after graph";
      return {};
    } catch (const std::string& problem) {
      return problem;
    }
  }

 private:
  struct Tok {
    std::string text;
    bool id;
  };

  void tokenize() {
    std::size_t i = 0;
    while (i < text_.size()) {
      const char c = text_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (text_.compare(i, 2, "//") == 0 || c == '#') {
        while (i < text_.size() && text_[i] != '\n') ++i;
      } else if (text_.compare(i, 2, "/*") == 0) {
        const auto end = text_.find("*/", i + 2);
        if (end == std::string::npos) throw std::string("unterminated block comment");
        i = end + 2;
      } else if (c == '"') {
        std::size_t j = i + 1;
        while (j < text_.size() && text_[j] != '"') j += text_[j] == '\\' ? 2 : 1;
        if (j >= text_.size()) throw std::string("unterminated string");
        toks_.push_back({text_.substr(i, j - i + 1), true});
        i = j + 1;
      } else if (text_.compare(i, 2, "->") == 0 || text_.compare(i, 2, "--") == 0) {
        toks_.push_back({text_.substr(i, 2), false});
        i += 2;
      } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
        std::size_t j = i;
        while (j < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_' || text_[j] == '.'))
          ++j;
        toks_.push_back({text_.substr(i, j - i), true});
        i = j;
      } else if (std::string("{}[];,=:").find(c) != std::string::npos) {
        toks_.push_back({std::string(1, c), false});
        ++i;
      } else {
        throw std::string("unexpected character '") + c + "'";
      }
    }
  }

  std::string word(std::size_t i) const { return i < toks_.size() ? toks_[i].text : std::string(); }
  bool is_id(std::size_t i) const { return i < toks_.size() && toks_[i].id; }
  bool is(std::size_t i, const char* s) const { return i < toks_.size() && !toks_[i].id && toks_[i].text == s; }

  std::size_t expect(std::size_t i, const char* s) const {
    if (!is(i, s)) throw std::string("expected '") + s + "' near token " + std::to_string(i) + " ('" + word(i) + "')";
    return i + 1;
  }

  std::size_t stmt_block(std::size_t i) const {
    i = expect(i, "{");
    while (!is(i, "}")) {
      if (i >= toks_.size()) throw std::string("unbalanced braces");
      i = stmt(i);
      if (is(i, ";")) ++i;
    }
    return i + 1;
  }

  std::size_t attr_list(std::size_t i) const {
    while (is(i, "[")) {
      ++i;
      while (!is(i, "]")) {
        if (!is_id(i)) throw std::string("expected attribute name");
        ++i;
        i = expect(i, "=");
        if (!is_id(i)) throw std::string("expected attribute value");
        ++i;
        if (is(i, ",") || is(i, ";")) ++i;
      }
      ++i;
    }
    return i;
  }

  std::size_t subgraph(std::size_t i) const {
    if (word(i) == "subgraph" && toks_[i].id) {
      ++i;
      if (is_id(i)) ++i;
    }
    return stmt_block(i);
  }

  std::size_t endpoint(std::size_t i) const {
    if (is(i, "{") || word(i) == "subgraph") return subgraph(i);
    if (!is_id(i)) throw std::string("expected node id near token ") + std::to_string(i);
    return i + 1;
  }

  std::size_t stmt(std::size_t i) const {
    const std::string w = word(i);
    if (toks_[i].id && (w == "graph" || w == "node" || w == "edge") && is(i + 1, "[")) return attr_list(i + 1);
    if (is_id(i) && is(i + 1, "=")) {
      if (!is_id(i + 2)) throw std::string("expected value after '='");
      return i + 3;
    }
    i = endpoint(i);
    while (is(i, "->")) i = endpoint(i + 1);
    if (is(i, "--")) throw std::string("undirected edge in digraph");
    return attr_list(i);
  }

  const std::string& text_;
  std::vector<Tok> toks_;
};

}  // namespace

std::string check_dot_syntax(const std::string& dot) { return DotChecker(dot).run(); }

}  // namespace testing_support

namespace testing_support {

BayesNet net_from_fragment(const Fragment& fragment) {
  std::vector<Variable> vars;
  std::vector<Edge> edges;
  std::map<std::string, std::vector<std::string>> parents;
  for (const auto& v : fragment.variables) vars.push_back({v.name, {"yes", "no"}, v.roles.front()});
  for (const auto& e : fragment.edges) {
    edges.push_back({e.parent, e.child, e.decision});
    parents[e.child].push_back(e.parent);
  }
  std::vector<Cpt> cpts;
  for (const auto& v : vars) {
    const auto& ps = parents[v.name];
    cpts.push_back({v.name, ps, std::vector<double>(std::size_t{2} << ps.size(), 0.5)});
  }
  return build_network(vars, edges, cpts).value();
}

SoundnessSweep template_soundness(TemplateId id) {
  const IdiomTemplate& tpl = find_template(id);
  // Per slot, every admissible (variables, roles) choice.
  struct Choice {
    std::vector<std::string> names;
    std::vector<Role> roles;
  };
  std::vector<std::vector<Choice>> options;
  for (const auto& slot : tpl.slots) {
    std::vector<Choice> choices;
    if (slot.optional) choices.push_back({});
    for (std::size_t count = 1; count <= (slot.arity == Arity::Many ? 2u : 1u); ++count) {
      std::vector<std::size_t> pick(count, 0);
      for (;;) {
        Choice c;
        for (std::size_t k = 0; k < count; ++k) {
          c.names.push_back(slot.name + std::to_string(k));
          c.roles.push_back(slot.allowed_roles[pick[k]]);
        }
        choices.push_back(std::move(c));
        std::size_t k = count;
        while (k-- > 0) {
          if (++pick[k] < slot.allowed_roles.size()) break;
          pick[k] = 0;
        }
        if (k == static_cast<std::size_t>(-1)) break;
      }
    }
    options.push_back(std::move(choices));
  }

  SoundnessSweep sweep;
  std::vector<std::size_t> at(options.size(), 0);
  for (;;) {
    Bindings bindings;
    RoleLookup roles;
    for (std::size_t s = 0; s < options.size(); ++s) {
      const Choice& c = options[s][at[s]];
      if (c.names.empty()) continue;
      bindings[tpl.slots[s].name] = c.names;
      for (std::size_t k = 0; k < c.names.size(); ++k) roles[c.names[k]] = c.roles[k];
    }
    const Fragment f = instantiate(id, bindings, &roles);
    const BayesNet net = net_from_fragment(f);
    ++sweep.instantiations;
    for (const auto& finding : lint(net).findings) {
      if (finding.rule == Rule::R1 || finding.rule == Rule::R2 || finding.rule == Rule::R5 ||
          finding.rule == Rule::R6) {
        std::string line = std::string(template_name(id)) + ":";
        for (const auto& [name, role] : roles) line += " " + name + "=" + std::string(role_name(role));
        sweep.violations.push_back(line + " -> " + rule_id(finding.rule) + " " + finding.message);
      }
    }
    std::size_t s = options.size();
    while (s-- > 0) {
      if (++at[s] < options[s].size()) break;
      at[s] = 0;
    }
    if (s == static_cast<std::size_t>(-1)) break;
  }
  return sweep;
}

}  // namespace testing_support
