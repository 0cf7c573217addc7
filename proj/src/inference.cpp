#include "idiombn/inference.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>

namespace idiombn {

double Distribution::operator[](std::string_view state) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == state) return probabilities[i];
  throw Error(ErrorCode::UnknownState, "variable '" + variable + "' has no state '" + std::string(state) + "'",
              {variable});
}

namespace {

// Dense table over `vars`, row-major with the last variable fastest.
struct Factor {
  std::vector<std::size_t> vars;
  std::vector<std::size_t> cards;
  std::vector<double> values;

  bool contains(std::size_t v) const { return std::find(vars.begin(), vars.end(), v) != vars.end(); }
};

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& cards) {
  std::vector<std::size_t> strides(cards.size());
  std::size_t s = 1;
  for (std::size_t k = cards.size(); k-- > 0;) {
    strides[k] = s;
    s *= cards[k];
  }
  return strides;
}

Factor cpt_factor(const BayesNet& net, std::size_t v) {
  Factor f;
  for (std::size_t p : net.parents(v)) {
    f.vars.push_back(p);
    f.cards.push_back(net.variable(p).cardinality());
  }
  f.vars.push_back(v);
  f.cards.push_back(net.variable(v).cardinality());
  f.values = net.cpt(v).table;
  return f;
}

// Drops observed variables by slicing at their observed state.
Factor reduce(const Factor& f, const std::vector<std::optional<std::size_t>>& observed) {
  Factor out;
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < f.vars.size(); ++k)
    if (!observed[f.vars[k]]) {
      out.vars.push_back(f.vars[k]);
      out.cards.push_back(f.cards[k]);
      keep.push_back(k);
    }
  if (keep.size() == f.vars.size()) return f;
  const auto in_strides = strides_of(f.cards);
  std::size_t base = 0;
  for (std::size_t k = 0; k < f.vars.size(); ++k)
    if (observed[f.vars[k]]) base += *observed[f.vars[k]] * in_strides[k];
  std::size_t size = 1;
  for (std::size_t c : out.cards) size *= c;
  out.values.resize(size);
  std::vector<std::size_t> idx(out.vars.size(), 0);
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t offset = base;
    for (std::size_t k = 0; k < keep.size(); ++k) offset += idx[k] * in_strides[keep[k]];
    out.values[i] = f.values[offset];
    for (std::size_t k = idx.size(); k-- > 0;) {
      if (++idx[k] < out.cards[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

Factor multiply(const Factor& a, const Factor& b) {
  Factor out = a;
  for (std::size_t k = 0; k < b.vars.size(); ++k)
    if (!a.contains(b.vars[k])) {
      out.vars.push_back(b.vars[k]);
      out.cards.push_back(b.cards[k]);
    }
  std::size_t size = 1;
  for (std::size_t c : out.cards) size *= c;
  out.values.assign(size, 0.0);

  const auto sa = strides_of(a.cards), sb = strides_of(b.cards);
  // Stride of each output variable inside a and b (0 when absent).
  std::vector<std::size_t> in_a(out.vars.size(), 0), in_b(out.vars.size(), 0);
  for (std::size_t k = 0; k < out.vars.size(); ++k) {
    for (std::size_t j = 0; j < a.vars.size(); ++j)
      if (a.vars[j] == out.vars[k]) in_a[k] = sa[j];
    for (std::size_t j = 0; j < b.vars.size(); ++j)
      if (b.vars[j] == out.vars[k]) in_b[k] = sb[j];
  }
  std::vector<std::size_t> idx(out.vars.size(), 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < size; ++i) {
    out.values[i] = a.values[ia] * b.values[ib];
    for (std::size_t k = idx.size(); k-- > 0;) {
      if (++idx[k] < out.cards[k]) {
        ia += in_a[k];
        ib += in_b[k];
        break;
      }
      ia -= (out.cards[k] - 1) * in_a[k];
      ib -= (out.cards[k] - 1) * in_b[k];
      idx[k] = 0;
    }
  }
  return out;
}

Factor sum_out(const Factor& f, std::size_t var) {
  const auto pos = static_cast<std::size_t>(std::find(f.vars.begin(), f.vars.end(), var) - f.vars.begin());
  Factor out;
  for (std::size_t k = 0; k < f.vars.size(); ++k)
    if (k != pos) {
      out.vars.push_back(f.vars[k]);
      out.cards.push_back(f.cards[k]);
    }
  const auto strides = strides_of(f.cards);
  const std::size_t inner = strides[pos];
  const std::size_t card = f.cards[pos];
  const std::size_t outer = f.values.size() / (inner * card);
  out.values.assign(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t s = 0; s < card; ++s)
      for (std::size_t i = 0; i < inner; ++i) out.values[o * inner + i] += f.values[(o * card + s) * inner + i];
  return out;
}

struct EliminationResult {
  // Unnormalized factor over the kept variable (empty vars when none kept).
  Factor factor;
  // Product of all factors reduced to scalars by evidence.
  double scalar = 1.0;
};

// Eliminates every relevant variable except `keep` under `observed`.
// Relevant = ancestors of the query and evidence variables; barren nodes
// sum to one and are pruned.
EliminationResult eliminate(const BayesNet& net, std::optional<std::size_t> keep,
                            const std::vector<std::optional<std::size_t>>& observed) {
  const std::size_t n = net.size();
  std::vector<std::size_t> roots;
  if (keep) roots.push_back(*keep);
  for (std::size_t v = 0; v < n; ++v)
    if (observed[v]) roots.push_back(v);
  std::vector<bool> relevant = ancestor_mask(net.dag(), roots);
  for (std::size_t v : roots) relevant[v] = true;

  EliminationResult result;
  std::vector<Factor> factors;
  for (std::size_t v = 0; v < n; ++v) {
    if (!relevant[v]) continue;
    Factor f = reduce(cpt_factor(net, v), observed);
    if (f.vars.empty())
      result.scalar *= f.values[0];
    else
      factors.push_back(std::move(f));
  }

  // Interaction graph over the variables still to eliminate.
  std::vector<std::set<std::size_t>> adjacent(n);
  std::vector<bool> pending(n, false);
  for (std::size_t v = 0; v < n; ++v)
    pending[v] = relevant[v] && !observed[v] && (!keep || v != *keep);
  for (const auto& f : factors)
    for (std::size_t a : f.vars)
      for (std::size_t b : f.vars)
        if (a != b) adjacent[a].insert(b);

  for (;;) {
    std::optional<std::size_t> best;
    std::size_t best_fill = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (!pending[v]) continue;
      std::vector<std::size_t> nb(adjacent[v].begin(), adjacent[v].end());
      std::size_t fill = 0;
      for (std::size_t i = 0; i < nb.size(); ++i)
        for (std::size_t j = i + 1; j < nb.size(); ++j)
          if (!adjacent[nb[i]].count(nb[j])) ++fill;
      if (!best || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    if (!best) break;
    const std::size_t v = *best;
    pending[v] = false;

    std::optional<Factor> product;
    std::vector<Factor> rest;
    for (auto& f : factors) {
      if (f.contains(v))
        product = product ? multiply(*product, f) : std::move(f);
      else
        rest.push_back(std::move(f));
    }
    factors = std::move(rest);
    if (product) {
      Factor summed = sum_out(*product, v);
      if (summed.vars.empty())
        result.scalar *= summed.values[0];
      else
        factors.push_back(std::move(summed));
    }
    for (std::size_t a : adjacent[v]) {
      adjacent[a].erase(v);
      for (std::size_t b : adjacent[v])
        if (a != b) adjacent[a].insert(b);
    }
    adjacent[v].clear();
  }

  if (keep) {
    Factor joined{{*keep}, {net.variable(*keep).cardinality()}, {}};
    joined.values.assign(joined.cards[0], 1.0);
    for (const auto& f : factors) joined = multiply(joined, f);
    result.factor = std::move(joined);
  } else {
    result.factor.values = {1.0};
  }
  return result;
}

std::vector<std::optional<std::size_t>> observe(const BayesNet& net, const Evidence& evidence) {
  std::vector<std::optional<std::size_t>> observed(net.size());
  for (auto [v, s] : net.resolve(evidence)) observed[v] = s;
  return observed;
}

Distribution make_distribution(const Variable& var, std::vector<double> probabilities) {
  return Distribution{var.name, var.states, std::move(probabilities)};
}

[[noreturn]] void impossible(const Evidence& evidence) {
  std::vector<std::string> names;
  std::string msg = "evidence has probability zero:";
  for (const auto& [name, state] : evidence) {
    names.push_back(name);
    msg += " " + name + "=" + state;
  }
  throw Error(ErrorCode::ImpossibleEvidence, msg, names);
}

}  // namespace

double evidence_probability(const BayesNet& net, const Evidence& evidence) {
  const auto observed = observe(net, evidence);
  const auto r = eliminate(net, std::nullopt, observed);
  return r.scalar * r.factor.values[0];
}

Distribution posterior(const BayesNet& net, std::string_view target, const Evidence& evidence) {
  const std::size_t t = net.index_of(target);
  const auto observed = observe(net, evidence);
  const Variable& var = net.variable(t);

  if (observed[t]) {
    if (evidence_probability(net, evidence) < kImpossibleEvidenceThreshold) impossible(evidence);
    std::vector<double> point(var.cardinality(), 0.0);
    point[*observed[t]] = 1.0;
    return make_distribution(var, std::move(point));
  }

  auto r = eliminate(net, t, observed);
  const double mass = std::accumulate(r.factor.values.begin(), r.factor.values.end(), 0.0);
  if (r.scalar * mass < kImpossibleEvidenceThreshold) impossible(evidence);
  for (double& q : r.factor.values) q /= mass;
  return make_distribution(var, std::move(r.factor.values));
}

Distribution enumerate_posterior(const BayesNet& net, std::string_view target, const Evidence& evidence) {
  if (net.size() > kMaxEnumerationVariables)
    throw Error(ErrorCode::TooLarge, "joint enumeration limited to " + std::to_string(kMaxEnumerationVariables) +
                                         " variables, network has " + std::to_string(net.size()));
  const std::size_t t = net.index_of(target);
  const auto observed = observe(net, evidence);
  const std::size_t n = net.size();

  std::vector<double> acc(net.variable(t).cardinality(), 0.0);
  std::vector<std::size_t> states(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (observed[v]) states[v] = *observed[v];
  for (;;) {
    acc[states[t]] += joint_probability(net, states);
    // Odometer over the unobserved variables.
    std::size_t k = n;
    while (k-- > 0) {
      if (observed[k]) continue;
      if (++states[k] < net.variable(k).cardinality()) break;
      states[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  const double mass = std::accumulate(acc.begin(), acc.end(), 0.0);
  if (mass < kImpossibleEvidenceThreshold) impossible(evidence);
  for (double& q : acc) q /= mass;
  return make_distribution(net.variable(t), std::move(acc));
}

std::map<std::string, Distribution> batch_query(const BayesNet& net, const std::vector<std::string>& targets,
                                                const Evidence& evidence) {
  std::map<std::string, Distribution> out;
  for (const auto& target : targets) out.emplace(target, posterior(net, target, evidence));
  return out;
}

}  // namespace idiombn
